//! Soup files: a text header terminated by a `data` line, then one binary
//! record per trajectory. Reals are stored by their IEEE-754 bits, so a write
//! followed by a read reproduces the soup exactly.
//!
//! Record layout (little endian): label `f64`, start `i64 × d`, step count
//! `u64`, then step bytes; each [`JUMP`] byte is followed by the re-entry
//! point as `i64 × d`.

use std::io::{BufRead, Read, Write};

use super::{SoupTrajectory, TrajectorySoup, Truncation, TruncationMode, JUMP};
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, Region, Sites};
use crate::walk::StopReason;

const MAGIC: &str = "interlace-soup 1";

fn io_err(e: std::io::Error) -> Error {
    Error::input(format!("soup i/o: {e}"))
}

fn fmt_point(p: &[i64]) -> String {
    p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

fn fmt_real(v: f64) -> String {
    format!("{:016x} {v:e}", v.to_bits())
}

fn fmt_region(r: &Region) -> String {
    match r {
        Region::Box { lower, sides } => {
            format!("box {} {}", fmt_point(lower.coords()), sides.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","))
        }
        Region::L1Ball { center, radius } => format!("l1 {} {radius}", fmt_point(center.coords())),
        Region::L2Ball { center, radius_sq } => format!("l2sq {} {radius_sq}", fmt_point(center.coords())),
        Region::LinfBall { center, radius } => format!("linf {} {radius}", fmt_point(center.coords())),
    }
}

pub fn write_soup<W: Write>(soup: &TrajectorySoup, mut out: W) -> Result<()> {
    let d = soup.dim();
    let t = &soup.truncation;
    let window: Vec<String> = soup.window.points().iter().map(|p| fmt_point(p.coords())).collect();
    let mode = match t.mode {
        TruncationMode::Reenter => "reenter",
        TruncationMode::Halt => "halt",
    };
    let header = format!(
        "{MAGIC}\nd {d}\nwindow {} {}\nu_max {}\ncapacity {}\ndelta {}\ncertified_error {}\nmode {mode}\n\
         stop_region {}\nlineage {}\ntrajectories {}\ndata\n",
        window.len(),
        window.join(" "),
        fmt_real(soup.u_max),
        fmt_real(soup.capacity),
        fmt_real(t.delta),
        fmt_real(t.certified_error),
        fmt_region(&t.stop_region),
        soup.lineage_string(),
        soup.trajectories.len(),
    );
    out.write_all(header.as_bytes()).map_err(io_err)?;
    for tr in &soup.trajectories {
        let mut buf = Vec::with_capacity(16 + 8 * d + tr.steps.len());
        buf.extend_from_slice(&tr.label.to_bits().to_le_bytes());
        for c in tr.start.coords() {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        buf.extend_from_slice(&(tr.steps.len() as u64).to_le_bytes());
        let mut jumps = tr.reentries.iter();
        for &s in &tr.steps {
            buf.push(s);
            if s == JUMP {
                let p = jumps.next().ok_or_else(|| Error::input("jump code without re-entry point"))?;
                for c in p.coords() {
                    buf.extend_from_slice(&c.to_le_bytes());
                }
            }
        }
        out.write_all(&buf).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

struct Header<R> {
    inner: R,
    line: String,
}

impl<R: BufRead> Header<R> {
    fn next(&mut self, key: &str) -> Result<String> {
        self.line.clear();
        self.inner.read_line(&mut self.line).map_err(io_err)?;
        let l = self.line.trim_end_matches('\n');
        match l.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest.to_string()),
            _ if l == key => Ok(String::new()),
            _ => Err(Error::input(format!("soup header: expected `{key}`, found `{l}`"))),
        }
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::input(format!("soup header: bad {what} `{s}`")))
}

fn parse_point(s: &str, d: usize) -> Result<LatticePoint> {
    let c: Vec<i64> = s.split(',').map(|v| parse_num(v, "coordinate")).collect::<Result<_>>()?;
    let p = LatticePoint::new(c);
    p.check_dim(d)?;
    Ok(p)
}

fn parse_real(s: &str) -> Result<f64> {
    let hex = s.split_whitespace().next().unwrap_or("");
    u64::from_str_radix(hex, 16).map(f64::from_bits).map_err(|_| Error::input(format!("soup header: bad real `{s}`")))
}

fn parse_region(s: &str, d: usize) -> Result<Region> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let [kind, center, size] = parts.as_slice() else {
        return Err(Error::input(format!("soup header: bad region `{s}`")));
    };
    let center = parse_point(center, d)?;
    Ok(match *kind {
        "box" => Region::Box {
            lower: center,
            sides: size.split(',').map(|v| parse_num(v, "side")).collect::<Result<_>>()?,
        },
        "l1" => Region::L1Ball { center, radius: parse_num(size, "radius")? },
        "l2sq" => Region::L2Ball { center, radius_sq: parse_num(size, "radius")? },
        "linf" => Region::LinfBall { center, radius: parse_num(size, "radius")? },
        _ => return Err(Error::input(format!("soup header: unknown region kind `{kind}`"))),
    })
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(io_err)?;
    Ok(u64::from_le_bytes(b))
}

fn read_point<R: Read>(r: &mut R, d: usize) -> Result<LatticePoint> {
    (0..d).map(|_| read_u64(r).map(|v| v as i64)).collect::<Result<Vec<_>>>().map(LatticePoint::new)
}

pub fn read_soup<R: BufRead>(input: R) -> Result<TrajectorySoup> {
    let mut h = Header { inner: input, line: String::new() };
    h.next(MAGIC)?;
    let d: usize = parse_num(&h.next("d")?, "dimension")?;
    let window_line = h.next("window")?;
    let mut words = window_line.split_whitespace();
    let n: usize = parse_num(words.next().unwrap_or(""), "window size")?;
    let pts: Vec<LatticePoint> = words.map(|w| parse_point(w, d)).collect::<Result<_>>()?;
    if pts.len() != n {
        return Err(Error::input(format!("soup header: window lists {} of {n} points", pts.len())));
    }
    let window = Sites::from_points(d, pts)?;
    let u_max = parse_real(&h.next("u_max")?)?;
    let capacity = parse_real(&h.next("capacity")?)?;
    let delta = parse_real(&h.next("delta")?)?;
    let certified_error = parse_real(&h.next("certified_error")?)?;
    let mode = match h.next("mode")?.as_str() {
        "reenter" => TruncationMode::Reenter,
        "halt" => TruncationMode::Halt,
        m => return Err(Error::input(format!("soup header: unknown mode `{m}`"))),
    };
    let stop_region = parse_region(&h.next("stop_region")?, d)?;
    let lineage_line = h.next("lineage")?;
    let lineage = if lineage_line.is_empty() {
        Vec::new()
    } else {
        lineage_line.split('/').map(|v| parse_num(v, "lineage")).collect::<Result<_>>()?
    };
    let count: usize = parse_num(&h.next("trajectories")?, "trajectory count")?;
    h.next("data")?;

    let mut r = h.inner;
    let mut trajectories = Vec::with_capacity(count);
    for _ in 0..count {
        let label = f64::from_bits(read_u64(&mut r)?);
        let start = read_point(&mut r, d)?;
        let len = read_u64(&mut r)? as usize;
        let mut steps = Vec::with_capacity(len);
        let mut reentries = Vec::new();
        for _ in 0..len {
            let mut b = [0u8; 1];
            r.read_exact(&mut b).map_err(io_err)?;
            if b[0] == JUMP {
                reentries.push(read_point(&mut r, d)?);
            } else if b[0] as usize >= 2 * d {
                return Err(Error::input(format!("step code {} out of range for d = {d}", b[0])));
            }
            steps.push(b[0]);
        }
        trajectories.push(SoupTrajectory { label, start, steps, reentries, stop_reason: StopReason::ExitedRegion });
    }
    Ok(TrajectorySoup {
        window,
        u_max,
        capacity,
        truncation: Truncation { mode, delta, stop_region, certified_error },
        lineage,
        trajectories,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::interlace::{Sampler, TruncationPolicy};
    use crate::rng::RngStream;
    use crate::walk::{GreenMethod, GreenTable};

    #[test]
    fn round_trip_is_bit_exact() {
        let w = Sites::from_points(
            3,
            vec![LatticePoint::new(vec![0, 0, 0]), LatticePoint::new(vec![1, 0, 0]), LatticePoint::new(vec![0, 2, -1])],
        )
        .unwrap();
        let t = Arc::new(GreenTable::new(3, GreenMethod::BesselProduct).unwrap());
        let s = Sampler::new(w, t, &TruncationPolicy::default()).unwrap();
        let soup = s.sample(4.0, &mut RngStream::from_seed(12).split(3)).unwrap();
        assert!(soup.trajectories.iter().any(|t| !t.reentries.is_empty()));
        let mut bytes = Vec::new();
        write_soup(&soup, &mut bytes).unwrap();
        let back = read_soup(bytes.as_slice()).unwrap();
        assert_eq!(back, soup);
        for (a, b) in back.trajectories.iter().zip(&soup.trajectories) {
            assert_eq!(a.label.to_bits(), b.label.to_bits());
        }
        assert_eq!(back.capacity.to_bits(), soup.capacity.to_bits());
        let mut again = Vec::new();
        write_soup(&back, &mut again).unwrap();
        assert_eq!(again, bytes);
    }

    #[test]
    fn truncated_input_is_an_error() {
        let w = Sites::from_points(3, vec![LatticePoint::origin(3)]).unwrap();
        let t = Arc::new(GreenTable::new(3, GreenMethod::BesselProduct).unwrap());
        let s = Sampler::new(w, t, &TruncationPolicy::default()).unwrap();
        let soup = s.sample(5.0, &mut RngStream::from_seed(2)).unwrap();
        let mut bytes = Vec::new();
        write_soup(&soup, &mut bytes).unwrap();
        bytes.truncate(bytes.len() - 1);
        assert!(read_soup(bytes.as_slice()).is_err());
    }
}
