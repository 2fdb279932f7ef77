//! Set syntax shared by every subcommand:
//! `origin`, `pair` (origin and e_1), `points:x,y,z;x,y,z`, `cube:S[@x,y,z]`
//! (side `S`, lower corner at the origin unless given), `l1:R`, `l2:R`,
//! `linf:R` (balls about the origin) and `shell:<set>` (its interior boundary).

use interlace_core::{Error, LatticePoint, Region, Sites};

fn bad(spec: &str, why: &str) -> Error {
    Error::Input(format!("set `{spec}`: {why}"))
}

fn coords(d: usize, text: &str, spec: &str) -> Result<LatticePoint, Error> {
    let c: Vec<i64> = text
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| bad(spec, &format!("`{t}` is not an integer"))))
        .collect::<Result<_, _>>()?;
    if c.len() != d {
        return Err(Error::Dimension { expected: d, got: c.len() });
    }
    Ok(LatticePoint::new(c))
}

fn number(text: &str, spec: &str) -> Result<u64, Error> {
    text.trim().parse().map_err(|_| bad(spec, &format!("`{text}` is not a nonnegative integer")))
}

pub fn parse_set(d: usize, spec: &str) -> Result<Sites, Error> {
    if d == 0 {
        return Err(Error::Input("dimension must be positive".into()));
    }
    let origin = LatticePoint::origin(d);
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let region = |r: Region| Sites::from_region(&r);
    match head {
        "origin" => Sites::from_points(d, vec![origin]),
        "pair" => Sites::from_points(d, vec![origin, LatticePoint::unit(d, 0, 1)]),
        "points" => {
            let pts = rest.split(';').map(|p| coords(d, p, spec)).collect::<Result<Vec<_>, _>>()?;
            Sites::from_points(d, pts)
        }
        "cube" => {
            let (side, corner) = rest.split_once('@').unwrap_or((rest, ""));
            let lower = if corner.is_empty() { origin } else { coords(d, corner, spec)? };
            region(Region::cube(lower, number(side, spec)?))
        }
        "l1" => region(Region::L1Ball { center: origin, radius: number(rest, spec)? }),
        "l2" => region(Region::l2_ball(origin, number(rest, spec)?)),
        "linf" => region(Region::LinfBall { center: origin, radius: number(rest, spec)? }),
        "shell" => Sites::from_points(d, parse_set(d, rest)?.interior_boundary()),
        _ => Err(bad(spec, "unknown kind")),
    }
}
