use std::collections::BTreeSet;
use std::sync::Arc;

use interlace_core::interlace::{write_soup, FirstOccupation, Sampler, TruncationMode, TruncationPolicy, UNDERPOWERED_REPLICAS};
use interlace_core::lattice::{ball_count_l1, peierls_bound_l1, sphere_count_l1, CountKind};
use interlace_core::percolation::{connectivity_function, crossing_probability_sweep, estimate_alpha, u_star_bracket, CrossingSpec};
use interlace_core::potential::{capacity_mc, equilibrium_measure};
use interlace_core::renorm::{certificate, check_a1, local_bound_rhs, RenormConfig, RenormConstants};
use interlace_core::walk::{green, harnack_check, GreenMethod, GreenTable, KilledDomain};
use interlace_core::{Error, Estimate, Exec, LatticePoint, Norm, Region, RngStream, Sites};
use serde_json::Value;

use crate::args::*;
use crate::error::CliError;
use crate::geometry::parse_set;
use crate::output::{num, write_json, write_table, RunInfo, Table};

type Res = Result<(), CliError>;

const STOCHASTIC: &[&str] = &["d", "u", "r_or_spec", "estimate", "stderr", "replicas", "seed"];

fn columns(extra: &[&'static str]) -> Vec<&'static str> {
    STOCHASTIC.iter().chain(extra).copied().collect()
}

fn stochastic_row(d: usize, u: Option<f64>, spec: &str, est: &Estimate, replicas: u64, seed: u64) -> Vec<String> {
    vec![
        d.to_string(),
        u.map(num).unwrap_or_default(),
        spec.into(),
        num(est.mean),
        num(est.stderr),
        replicas.to_string(),
        seed.to_string(),
    ]
}

struct Ctx<'a> {
    common: &'a Common,
    info: RunInfo,
    exec: Exec,
    rng: RngStream,
}

impl Ctx<'_> {
    fn table(&self, t: &Table) -> Res {
        write_table(self.common, &self.info, t)
    }

    /// Called after output is written, so an underpowered run still leaves its numbers behind.
    fn check_power(&self, replicas: u64) -> Res {
        if replicas >= UNDERPOWERED_REPLICAS {
            return Ok(());
        }
        let msg = format!("{replicas} replicas is below {UNDERPOWERED_REPLICAS}");
        match self.common.on_underpowered {
            Underpowered::Error => Err(CliError::Underpowered(msg)),
            Underpowered::Warn => {
                log::warn!("underpowered statistics: {msg}");
                Ok(())
            }
        }
    }
}

fn table_for(d: usize) -> Result<Arc<GreenTable>, CliError> {
    Ok(Arc::new(GreenTable::new(d, GreenMethod::BesselProduct)?))
}

fn render(p: &LatticePoint) -> String {
    p.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn run(cli: Cli) -> Res {
    let name = match &cli.command {
        Command::Green(_) => "green",
        Command::Capacity(_) => "capacity",
        Command::Harnack(_) => "harnack",
        Command::SphereCount(_) => "sphere-count",
        Command::Sample(_) => "sample",
        Command::IdentityCheck(_) => "identity-check",
        Command::CrossingSweep(_) => "crossing-sweep",
        Command::Connectivity(_) => "connectivity",
        Command::Alpha(_) => "alpha",
        Command::RenormCert(_) => "renorm-cert",
        Command::LocalBound(_) => "local-bound",
        Command::A1Check(_) => "a1-check",
    };
    let args = match serde_json::to_value(&cli.command).expect("plain settings") {
        Value::Object(mut m) => m.remove(name).unwrap_or(Value::Null),
        other => other,
    };
    let ctx = Ctx {
        common: &cli.common,
        info: RunInfo::new(name, &cli.common, args),
        exec: if cli.common.sequential { Exec::Sequential } else { Exec::Parallel },
        rng: RngStream::from_seed(cli.common.seed),
    };
    match &cli.command {
        Command::Green(a) => run_green(&ctx, a),
        Command::Capacity(a) => run_capacity(&ctx, a),
        Command::Harnack(a) => run_harnack(&ctx, a),
        Command::SphereCount(a) => run_sphere_count(&ctx, a),
        Command::Sample(a) => run_sample(&ctx, a),
        Command::IdentityCheck(a) => run_identity(&ctx, a),
        Command::CrossingSweep(a) => run_sweep(&ctx, a),
        Command::Connectivity(a) => run_connectivity(&ctx, a),
        Command::Alpha(a) => run_alpha(&ctx, a),
        Command::RenormCert(a) => run_cert(&ctx, a),
        Command::LocalBound(a) => run_local_bound(&ctx, a),
        Command::A1Check(a) => run_a1(&ctx, a),
    }
}

fn run_green(ctx: &Ctx, a: &GreenArgs) -> Res {
    let method = match a.method {
        Method::Bessel => GreenMethod::BesselProduct,
        Method::Fourier => GreenMethod::Fourier,
        Method::Killed => GreenMethod::KilledExtrapolation,
    };
    let points: Vec<LatticePoint> = match (&a.x, a.radius) {
        (Some(x), _) => vec![LatticePoint::new(x.clone())],
        (None, Some(r)) => {
            let all = Region::LinfBall { center: LatticePoint::origin(a.d), radius: r }.points()?;
            all.iter().map(|p| p.canonical()).collect::<BTreeSet<_>>().into_iter().collect()
        }
        (None, None) => vec![LatticePoint::origin(a.d)],
    };
    let mut t = Table::new(&["d", "x", "method", "g"]);
    for p in &points {
        let g = green(a.d, p, method)?;
        t.push(vec![a.d.to_string(), render(p), format!("{:?}", a.method).to_lowercase(), num(g)]);
    }
    ctx.table(&t)
}

fn run_capacity(ctx: &Ctx, a: &CapacityArgs) -> Res {
    let k = parse_set(a.d, &a.k)?;
    let table = table_for(a.d)?;
    let m = equilibrium_measure(&k, &table)?;
    let mut t = Table::new(&columns(&["size", "support", "capacity", "residual"]));
    let fixed = vec![k.len().to_string(), m.support().len().to_string(), num(m.capacity()), num(m.residual())];
    match a.mc_replicas {
        Some(n) => {
            let est = capacity_mc(&k, &table, n, &ctx.rng, ctx.exec)?;
            t.notes.push("estimate is the escape-walk capacity; capacity is the linear solve".into());
            let mut row = stochastic_row(a.d, None, &a.k, &est, n, ctx.info.seed);
            row.extend(fixed);
            t.push(row);
            ctx.table(&t)?;
            ctx.check_power(n)
        }
        None => {
            let exact = Estimate { mean: m.capacity(), stderr: 0.0, samples: 0 };
            let mut row = stochastic_row(a.d, None, &a.k, &exact, 0, ctx.info.seed);
            row.extend(fixed);
            t.push(row);
            ctx.table(&t)
        }
    }
}

fn run_harnack(ctx: &Ctx, a: &HarnackArgs) -> Res {
    let ball = |r| Sites::from_region(&Region::l2_ball(LatticePoint::origin(a.d), r));
    let (u1, u2) = (ball(a.u1)?, ball(a.u2)?);
    let domain = KilledDomain::new(ball(a.u3)?)?;
    let rep = harnack_check(&u1, &u2, &domain, a.trials, &ctx.rng, ctx.exec)?;
    let mut t = Table::new(&["d", "u1", "u2", "u3", "harnack_constant", "trials", "violations", "max_ratio"]);
    t.push(vec![
        a.d.to_string(),
        a.u1.to_string(),
        a.u2.to_string(),
        a.u3.to_string(),
        num(rep.constant),
        rep.trials.to_string(),
        rep.violations.to_string(),
        num(rep.max_ratio),
    ]);
    ctx.table(&t)
}

fn run_sphere_count(ctx: &Ctx, a: &SphereCountArgs) -> Res {
    let (kind, count) = if a.ball {
        (CountKind::Ball, ball_count_l1(a.d, a.l))
    } else {
        (CountKind::Sphere, sphere_count_l1(a.d, a.l))
    };
    let bound = peierls_bound_l1(a.d, a.l, kind);
    let mut t = Table::new(&["d", "l", "kind", "count", "bound", "log_bound", "dominated"]);
    t.push(vec![
        a.d.to_string(),
        a.l.to_string(),
        if a.ball { "ball" } else { "sphere" }.into(),
        count.to_string(),
        num(bound.value),
        num(bound.log),
        bound.dominates(&count).to_string(),
    ]);
    ctx.table(&t)
}

fn run_sample(ctx: &Ctx, a: &SampleArgs) -> Res {
    let window = parse_set(a.d, &a.window)?;
    let policy = TruncationPolicy {
        mode: match a.mode {
            Mode::Reenter => TruncationMode::Reenter,
            Mode::Halt => TruncationMode::Halt,
        },
        delta: a.delta,
        margin: a.margin,
        ..Default::default()
    };
    let sampler = Sampler::new(window, table_for(a.d)?, &policy)?;
    let soup = sampler.sample(a.u, &mut ctx.rng.split(0))?;
    let path = a.soup.display().to_string();
    let file = std::fs::File::create(&a.soup).map_err(CliError::io(path.clone()))?;
    let mut w = std::io::BufWriter::new(file);
    write_soup(&soup, &mut w)?;
    std::io::Write::flush(&mut w).map_err(CliError::io(path.clone()))?;
    let steps: usize = soup.trajectories.iter().map(|t| t.steps.len()).sum();
    let mut t = Table::new(&["d", "u", "window", "sites", "capacity", "trajectories", "steps", "certified_error", "soup"]);
    t.push(vec![
        a.d.to_string(),
        num(a.u),
        a.window.clone(),
        soup.window.len().to_string(),
        num(soup.capacity),
        soup.count().to_string(),
        steps.to_string(),
        num(soup.truncation.certified_error),
        path,
    ]);
    ctx.table(&t)
}

/// The box spanned by `k`, grown by `margin` on every side.
fn grown_box(k: &Sites, margin: u64) -> Result<Sites, Error> {
    let (lo, hi) = k.bounding_box();
    let m = margin as i64;
    let lower = LatticePoint::new(lo.iter().map(|l| l - m).collect());
    let sides = lo.iter().zip(hi).map(|(l, h)| (h - l + 1 + 2 * m) as u64).collect();
    Sites::from_region(&Region::Box { lower, sides })
}

fn run_identity(ctx: &Ctx, a: &IdentityArgs) -> Res {
    if a.replicas == 0 {
        return Err(Error::Input("identity check needs at least one replica".into()).into());
    }
    if a.u.iter().any(|u| !(*u >= 0.0 && u.is_finite())) {
        return Err(Error::Input("levels must be finite and nonnegative".into()).into());
    }
    let k = parse_set(a.d, &a.k)?;
    let table = table_for(a.d)?;
    let cap_k = equilibrium_measure(&k, &table)?.capacity();
    let window = grown_box(&k, a.window_margin)?;
    let sampler = Sampler::new(window, table, &TruncationPolicy::default())?;
    let u_max = a.u.iter().copied().fold(0.0, f64::max);
    // smallest label touching K, per replica
    let first: Vec<Result<f64, Error>> = interlace_core::exec::map_indexed(a.replicas, ctx.exec, |i| {
        let soup = sampler.sample(u_max, &mut ctx.rng.split(i))?;
        let occ = FirstOccupation::new(&soup, &k)?;
        Ok(occ.levels().iter().copied().fold(f64::INFINITY, f64::min))
    });
    let first = first.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&columns(&["exact", "z"]));
    t.notes.push(format!("capacity(K) = {cap_k}; window = box around K grown by {}", a.window_margin));
    for &u in &a.u {
        let hits = first.iter().filter(|&&l| l > u).count() as u64;
        let est = Estimate::binomial(hits, a.replicas);
        let exact = (-u * cap_k).exp();
        let mut row = stochastic_row(a.d, Some(u), &a.k, &est, a.replicas, ctx.info.seed);
        row.extend([num(exact), num(est.z_score(exact))]);
        t.push(row);
    }
    ctx.table(&t)?;
    ctx.check_power(a.replicas)
}

fn run_sweep(ctx: &Ctx, a: &SweepArgs) -> Res {
    let (spec, label) = match (&a.source, &a.target, &a.window) {
        (Some(s), Some(t), Some(w)) => (
            CrossingSpec::new(parse_set(a.d, s)?, parse_set(a.d, t)?, parse_set(a.d, w)?)?,
            format!("{s} -> {t} in {w}"),
        ),
        _ => {
            if a.side < 2 {
                return Err(Error::Input("cube side must be at least 2".into()).into());
            }
            let w = Sites::from_region(&Region::cube(LatticePoint::origin(a.d), a.side))?;
            let face = |c: i64| Sites::from_points(a.d, w.points().iter().filter(|p| p.coords()[0] == c).cloned().collect());
            (CrossingSpec::new(face(0)?, face(a.side as i64 - 1)?, w.clone())?, format!("cube:{} faces", a.side))
        }
    };
    let curve = crossing_probability_sweep(&spec, &a.u_grid, a.replicas, &ctx.rng, table_for(a.d)?, ctx.exec)?;
    let bracket = u_star_bracket(&curve.points);
    let show = |v: Option<f64>| v.map(num).unwrap_or_else(|| "none".into());
    let mut t = Table::new(&columns(&[]));
    t.notes.push(format!("u_star_bracket: lower = {}, upper = {}", show(bracket.lower), show(bracket.upper)));
    t.notes.push(format!("monotone_per_replica: {}", curve.monotone_per_replica()));
    for p in &curve.points {
        t.push(stochastic_row(a.d, Some(p.x), &label, &p.estimate, a.replicas, ctx.info.seed));
    }
    ctx.table(&t)?;
    ctx.check_power(a.replicas)
}

fn connectivity(ctx: &Ctx, a: &ConnectivityArgs) -> Result<interlace_core::percolation::ConnectivityCurve, CliError> {
    let metric = match a.metric {
        Metric::L1 => Norm::L1,
        Metric::Linf => Norm::Linf,
    };
    Ok(connectivity_function(a.d, a.u, &a.radii, metric, a.replicas, &ctx.rng, table_for(a.d)?, ctx.exec)?)
}

fn metric_name(m: Metric) -> &'static str {
    match m {
        Metric::L1 => "l1",
        Metric::Linf => "linf",
    }
}

fn run_connectivity(ctx: &Ctx, a: &ConnectivityArgs) -> Res {
    let curve = connectivity(ctx, a)?;
    let mut t = Table::new(&columns(&[]));
    for p in &curve.points {
        let spec = format!("{}:{}", metric_name(a.metric), p.x);
        t.push(stochastic_row(a.d, Some(a.u), &spec, &p.estimate, a.replicas, ctx.info.seed));
    }
    ctx.table(&t)?;
    ctx.check_power(a.replicas)
}

fn run_alpha(ctx: &Ctx, a: &ConnectivityArgs) -> Res {
    let curve = connectivity(ctx, a)?;
    let pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.x, p.estimate.mean)).collect();
    let fit = estimate_alpha(&pts)?;
    let mut t = Table::new(&columns(&["band_low", "band_high"]));
    t.notes.push(format!("fit of log P against -log r over radii {:?}", a.radii));
    let est = Estimate { mean: fit.alpha, stderr: fit.stderr, samples: a.replicas };
    let mut row = stochastic_row(a.d, Some(a.u), &format!("alpha:{}", metric_name(a.metric)), &est, a.replicas, ctx.info.seed);
    row.extend([num(fit.band.0), num(fit.band.1)]);
    t.push(row);
    ctx.table(&t)?;
    ctx.check_power(a.replicas)
}

fn constants(c: &ConstantArgs) -> Result<RenormConstants, CliError> {
    let base = c.profile.map(|Profile::Toy| RenormConstants::toy());
    let pick = |v: Option<f64>, f: fn(&RenormConstants) -> f64| v.or(base.as_ref().map(f));
    Ok(RenormConstants::from_parts(
        pick(c.c2, |k| k.c2),
        pick(c.c4, |k| k.c4),
        pick(c.c5, |k| k.c5),
        pick(c.c6, |k| k.c6),
    )?)
}

fn run_cert(ctx: &Ctx, a: &CertArgs) -> Res {
    let cfg = RenormConfig::wired(a.d, a.eps, constants(&a.constants)?)?;
    let cert = certificate(&cfg, a.log_p0)?;
    let mut result = serde_json::to_value(&cert).expect("plain record");
    if let Value::Object(m) = &mut result {
        m.insert("parameters".into(), serde_json::to_value(&cfg).expect("plain record"));
    }
    write_json(ctx.common, &ctx.info, result)
}

fn run_local_bound(ctx: &Ctx, a: &LocalBoundArgs) -> Res {
    let log_d = match (a.d, a.log_d) {
        (_, Some(l)) => l,
        (Some(d), None) if d > 0.0 => d.ln(),
        _ => return Err(Error::Input("give a positive --d or --log-d".into()).into()),
    };
    let b = local_bound_rhs(log_d, a.eps, a.m, &constants(&a.constants)?)?;
    let mut t = Table::new(&[
        "log_d", "eps", "m", "exponent", "target", "margin", "margin_per_dm", "holds", "threshold_log_d",
    ]);
    t.push(vec![
        num(b.log_d),
        num(b.eps),
        b.m.to_string(),
        num(b.exponent),
        num(b.target),
        num(b.margin),
        num(b.margin_per_dm),
        b.holds.to_string(),
        num(b.threshold_log_d),
    ]);
    ctx.table(&t)
}

fn run_a1(ctx: &Ctx, a: &A1Args) -> Res {
    let c = check_a1(a.a, a.b)?;
    let mut t = Table::new(&["a", "b", "lhs", "rhs", "slack", "holds"]);
    t.push(vec![num(a.a), num(a.b), num(c.lhs), num(c.rhs), num(c.slack), c.holds.to_string()]);
    ctx.table(&t)
}
