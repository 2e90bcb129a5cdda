//! One function per subcommand. Each returns an [`Outcome`]; rejected input
//! surfaces as [`Invalid`] or as a validation-class library error.

use anyhow::Result;
use mcf_core::barriers::{self, convexity_reduction_check, gamma_threshold_check, supersolution_residual};
use mcf_core::cone_heat;
use mcf_core::flow::{self, EvolveOptions, ProfileState, StopRule};
use mcf_core::geometry::{curvature, ProfileJet};
use mcf_core::grid;
use mcf_core::jacobi;
use mcf_core::minimal_surface::{self, MinimalOptions, MinimalProfile};
use mcf_core::params::derive_constants;
use mcf_core::stencil::fd_jets;
use mcf_core::verify::{self, Scale};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::*;
use crate::output::{Outcome, Table};
use crate::plot::{self, Axes};

/// Input rejected by the command itself (exit code 2).
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid input: {}", self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Invalid(msg.into()).into())
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Constants(a) => constants(a),
        Command::Curvature(a) => curvature_cmd(a),
        Command::MinimalSurface(a) => minimal(a),
        Command::Jacobi(a) => jacobi_cmd(a),
        Command::HeatKernel(a) => heat(a),
        Command::Evolve(a) => evolve(a),
        Command::Barriers(a) => barrier_cmd(a),
        Command::VerifyAll(a) => verify_all(a),
        Command::Plot(a) => plot_cmd(a),
    }
}

fn constants(a: &ConstantsArgs) -> Result<Outcome> {
    let p = derive_constants(a.n, a.k)?;
    let check = a.a.map(|x| p.exponent_condition(x));
    let passed = check.is_none_or(|c| c.admissible);
    let report = json!({
        "params": p,
        "alpha_alt": mcf_core::params::alpha_alt(a.n),
        "barrier_bracket": p.barrier_bracket(),
        "admissible_window": p.admissible_window(),
        "exponent_condition": check,
    });
    Ok(Outcome::new(report, passed))
}

fn curvature_cmd(a: &CurvatureArgs) -> Result<Outcome> {
    if a.nodes < 5 {
        return invalid("need at least 5 nodes");
    }
    if a.radius.is_nan() || a.radius <= 0.0 {
        return invalid("radius must be positive");
    }
    let (lo, hi) = match a.shape {
        Shape::Cone => (0.1, 10.0),
        Shape::Cylinder => (0.0, 2.0 * a.radius),
        Shape::Sphere => (0.0, 0.9 * a.radius),
    };
    let r = grid::uniform(lo, hi, a.nodes)?;
    let jet = |x: f64| match a.shape {
        Shape::Cone => ProfileJet::cone(x),
        Shape::Cylinder => ProfileJet::cylinder(x, a.radius),
        Shape::Sphere => ProfileJet::sphere(x, a.radius),
    };
    let m = a.n as f64 - 1.0;
    let k = 2.0 * a.n as f64 - 1.0;
    let exact = |x: f64| match a.shape {
        Shape::Cone => (0.0, m / (x * x)),
        Shape::Cylinder => (-m / a.radius, m / (a.radius * a.radius)),
        Shape::Sphere => (-k / a.radius, k / (a.radius * a.radius)),
    };
    let fd = match a.fd_width {
        None => None,
        Some(w @ (3 | 5)) => {
            let q: Vec<f64> = r.iter().map(|&x| jet(x).q).collect();
            Some(fd_jets(&r, &q, w, true))
        }
        Some(w) => return invalid(format!("fd width {w} must be 3 or 5")),
    };
    let mut t = Table::new(&["r", "q", "q1", "q2", "h", "a2", "h_exact", "a2_exact", "h_fd", "a2_fd"]);
    let (mut err, mut err_fd) = (0.0f64, 0.0f64);
    for (i, &x) in r.iter().enumerate() {
        let j = jet(x);
        let c = curvature(a.n, j)?;
        let (he, ae) = exact(x);
        err = err.max((c.h - he).abs() / he.abs().max(1.0)).max((c.a2 - ae).abs() / ae.abs().max(1.0));
        let (hf, af) = match &fd {
            Some(jets) => {
                let cf = curvature(a.n, ProfileJet::new(x, j.q, jets[i].0, jets[i].1))?;
                err_fd = err_fd.max((cf.h - he).abs()).max((cf.a2 - ae).abs());
                (cf.h, cf.a2)
            }
            None => (f64::NAN, f64::NAN),
        };
        t.push(vec![x, j.q, j.q1, j.q2, c.h, c.a2, he, ae, hf, af]);
    }
    let passed = err <= 1e-10;
    let report = json!({
        "shape": a.shape,
        "max_relative_error": err,
        "max_fd_error": fd.as_ref().map(|_| err_fd),
        "tolerance": 1e-10,
    });
    Ok(Outcome::new(report, passed).table("curvature", t))
}

fn minimal(a: &MinimalArgs) -> Result<Outcome> {
    let r_max = a.r_max.unwrap_or(1e4 * a.b);
    let mp = MinimalProfile::build(a.n, a.b, MinimalOptions::new(r_max, a.tol).per_decade(a.per_decade))?;
    let u0 = minimal_surface::u0_profile(&mp)?;
    let mut t = Table::new(&["r", "q", "q1", "q2", "w", "u0"]);
    for i in 0..mp.len() {
        let j = mp.node_jet(i);
        t.push(vec![mp.grid[i], j.q, j.q1, j.q2, mp.w[i], u0.u0[i]]);
    }
    let alpha = mcf_core::params::alpha(a.n);
    let rel = ((mp.alpha_fit - alpha) / alpha).abs();
    let q2_min = mp.q2.iter().cloned().fold(f64::INFINITY, f64::min);
    let passed = rel <= 0.05 && q2_min > 0.0;
    let report = json!({
        "n": a.n,
        "b": a.b,
        "r_max": r_max,
        "nodes": mp.len(),
        "alpha": alpha,
        "alpha_fit": mp.alpha_fit,
        "alpha_relative_error": rel,
        "min_q2": q2_min,
        "ode_defect": mp.defect(),
        "u0_tail_exponent": u0.tail_exponent,
    });
    Ok(Outcome::new(report, passed).table("profile", t))
}

fn jacobi_cmd(a: &JacobiArgs) -> Result<Outcome> {
    if a.j_max > 4 {
        return invalid("j_max must be at most 4");
    }
    // Large enough for the ladder fits and for the eigenvalue truncation.
    let r_max = (a.b * 10f64.powf(2.0 + a.j_max as f64 / 2.0)).max(2.0 * a.r_trunc);
    let mp = MinimalProfile::build(a.n, a.b, MinimalOptions::new(r_max, 1e-11).per_decade(a.per_decade))?;
    let jd = jacobi::assemble(&mp)?;
    let lu0 = jacobi::apply_l(&jd, &jd.u0_field())?;
    let lu0_res = jd.r.iter().zip(&lu0).filter(|(r, _)| **r <= r_max / 2.0).map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let modes = jacobi::generalized_kernel(&jd, a.j_max)?;
    let alpha = mcf_core::params::alpha(a.n);
    let mut ladder = Vec::new();
    let mut ok = lu0_res <= 1e-6;
    for m in &modes {
        let (ti, to) = (2.0 * m.j as f64, 2.0 * m.j as f64 + alpha);
        let good = (m.inner_exponent - ti).abs() <= jacobi::exponent_tolerance(ti)
            && (m.outer_exponent - to).abs() <= jacobi::exponent_tolerance(to);
        ok &= good;
        ladder.push(json!({"j": m.j, "inner": m.inner_exponent, "inner_target": ti, "outer": m.outer_exponent, "outer_target": to, "within_tolerance": good}));
    }
    let top = jacobi::top_eigenvalue(&jd, a.r_trunc, a.nodes)?;
    ok &= top.lambda_max <= 1e-3;
    let mut header = vec!["r".to_string()];
    header.extend(modes.iter().map(|m| format!("u{}", m.j)));
    let mut t = Table { header, rows: Vec::new() };
    for i in 0..jd.r.len() {
        let mut row = vec![jd.r[i]];
        row.extend(modes.iter().map(|m| m.field.u[i]));
        t.push(row);
    }
    let report = json!({
        "n": a.n,
        "b": a.b,
        "r_max": r_max,
        "lu0_residual": lu0_res,
        "ladder": ladder,
        "top_eigenvalue": top.lambda_max,
        "r_trunc": a.r_trunc,
        "eigen_nodes": a.nodes,
    });
    Ok(Outcome::new(report, ok).table("kernel", t))
}

fn heat(a: &HeatArgs) -> Result<Outcome> {
    let p = derive_constants(a.n, a.k)?;
    let times = if a.times.is_empty() { (0..=8).map(|i| 10f64.powf(i as f64 / 4.0)).collect() } else { a.times.clone() };
    let rep = cone_heat::decay_experiment(&p, a.delta, &times)?;
    let target = -a.delta / 2.0;
    let rel = ((rep.fit.exponent - target) / target).abs();
    let mut t = Table::new(&["t", "sup_ratio"]);
    for (x, y) in rep.times.iter().zip(&rep.sup_ratio) {
        t.push(vec![*x, *y]);
    }
    let report = json!({ "mu": p.mu, "decay": rep, "target_exponent": target, "relative_error": rel });
    let mut out = Outcome::new(report, rel <= 0.15);
    if a.plot {
        let s = plot::series(&t, "t", &["sup_ratio".to_string()])?;
        out.plots.push(("decay".into(), plot::render("decay of the weighted sup", "t", &s, Axes::LogLog, true)?));
    }
    Ok(out.table("decay", t))
}

fn initial_state(a: &EvolveArgs) -> Result<ProfileState> {
    if a.nodes < 10 {
        return invalid("need at least 10 nodes");
    }
    if a.order != 2 && a.order != 4 {
        return invalid("order must be 2 or 4");
    }
    let st = match a.initial {
        Initial::Cylinder => ProfileState::cylinder(a.n, a.t_sing, grid::uniform(0.0, a.r_out.unwrap_or(1.0), a.nodes)?, 0.0, a.order)?,
        Initial::Sphere => ProfileState::sphere(a.n, a.t_sing, grid::uniform(0.0, a.r_out.unwrap_or(0.5), a.nodes)?, 0.0, a.order)?,
        Initial::Cone => {
            let hi = a.r_out.unwrap_or(10.0);
            let per_decade = ((a.nodes as f64) / (hi / 0.1).log10()).ceil() as usize;
            ProfileState::cone(grid::geometric(0.1, hi, per_decade.max(2))?, a.order)?
        }
        Initial::Minimal => {
            let hi = a.r_out.unwrap_or(20.0 * a.param);
            let mp = MinimalProfile::build(a.n, a.param, MinimalOptions::new((5.0 * hi).max(50.0 * a.param), 1e-12))?;
            let g = grid::uniform(0.0, hi, a.nodes)?;
            let q = g.iter().map(|&r| mp.eval(r).q).collect();
            ProfileState::pinned(g, q, 0.0, a.order)?
        }
        Initial::Hyperboloid => {
            let g = grid::uniform(0.0, a.r_out.unwrap_or(5.0), a.nodes)?;
            let q = g.iter().map(|r| (r * r + a.param * a.param).sqrt()).collect();
            ProfileState::pinned(g, q, 0.0, a.order)?
        }
    };
    Ok(st)
}

fn evolve(a: &EvolveArgs) -> Result<Outcome> {
    let st = initial_state(a)?;
    let stop = StopRule { amax_cap: a.amax_cap.unwrap_or(f64::INFINITY), qmin_floor: a.qmin_floor.unwrap_or(0.0) };
    let opts = EvolveOptions { tol: a.tol, outputs: a.outputs.clone(), ..Default::default() };
    let (traj, d) = flow::evolve_with(&st, a.n, a.horizon, stop, &opts)?;
    let mut diag = Table::new(&["t", "tau", "hmax", "amax", "qmin", "q_inner"]);
    for i in 0..d.times.len() {
        diag.push(vec![d.times[i], a.t_sing - d.times[i], d.hmax[i], d.amax[i], d.qmin[i], d.q_inner[i]]);
    }
    let mut snaps = Table::new(&["t", "r", "q"]);
    for s in &traj.snapshots {
        for (r, q) in s.grid.iter().zip(&s.q) {
            snaps.push(vec![s.t, *r, *q]);
        }
    }
    let fit = match a.fit_window.as_slice() {
        [] => None,
        [lo, hi] => Some(flow::fit_rate(&d.times, &d.amax, a.t_sing, (*lo, *hi))?),
        _ => return invalid("fit window takes two values"),
    };
    let report = json!({
        "initial": a.initial,
        "stop": d.stop,
        "steps": d.steps,
        "rejected": d.rejected,
        "final_time": d.times.last(),
        "final_amax": d.amax.last(),
        "final_qmin": d.qmin.last(),
        "t_est": d.t_est,
        "amax_rate": fit,
    });
    let mut out = Outcome::new(report, true);
    if a.plot {
        let s = plot::series(&diag, "tau", &["amax".to_string()])?;
        out.plots.push(("rate".into(), plot::render("Amax against T - t", "T - t", &s, Axes::LogLog, true)?));
    }
    Ok(out.table("diagnostics", diag).table("snapshots", snaps))
}

fn barrier_cmd(a: &BarrierArgs) -> Result<Outcome> {
    let p = derive_constants(a.n, a.k)?;
    let s = barriers::supersolution(&p, a.c0)?;
    let gamma = a.gamma.unwrap_or(2.0 * (s.c1 / s.c0).sqrt());
    let c_bar = a.c_bar.unwrap_or(s.c0 - s.c1 / (gamma * gamma));
    if a.samples == 0 {
        return invalid("need at least one sample");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let samples: Vec<(f64, f64)> = (0..a.samples)
        .map(|_| {
            let t = rng.gen_range(0.0..p.t_sing);
            (s.positivity_radius(t) * (1.0 + 10f64.powf(rng.gen_range(-6.0..2.0))), t)
        })
        .collect();
    let res = supersolution_residual(&s, a.qr_bound, &samples)?;
    let thr = gamma_threshold_check(&s, gamma, c_bar.max(0.0), &samples)?;
    let conv_samples: Vec<(f64, f64)> = (0..a.samples)
        .map(|_| {
            let r = rng.gen_range(1e-3..10.0);
            (r, r * rng.gen_range(0.0..1e3))
        })
        .collect();
    let conv = convexity_reduction_check(&conv_samples)?;
    let passed = res.min_normalized >= -1e-12 && thr.hypothesis && (thr.samples == 0 || thr.min_margin >= -1e-12) && conv.holds;
    let report = json!({
        "supersolution": s,
        "bracket": p.barrier_bracket(),
        "gamma": gamma,
        "c_bar": c_bar,
        "residual": res,
        "threshold": thr,
        "convexity": conv,
        "seed": a.seed,
    });
    Ok(Outcome::new(report, passed))
}

fn verify_all(a: &VerifyArgs) -> Result<Outcome> {
    let scale = if a.quick { Scale::Quick } else { Scale::Full };
    let ids: Vec<u8> = if a.only.is_empty() { (1..=8).collect() } else { a.only.clone() };
    let mut reports = Vec::new();
    for id in ids {
        if !(1..=8).contains(&id) {
            return invalid(format!("criterion id {id} not in 1..=8"));
        }
        let rep = verify::run_criterion(id, scale, a.seed)?;
        eprintln!("{}", rep.line());
        reports.push(rep);
    }
    let passed = reports.iter().all(|r| r.passed);
    Ok(Outcome::new(json!({ "scale": scale, "seed": a.seed, "criteria": reports, "passed": passed }), passed))
}

fn plot_cmd(a: &PlotArgs) -> Result<Outcome> {
    let table = plot::read_table(&a.input).map_err(|e| Invalid(format!("{e:#}")))?;
    let axes = match a.axes {
        AxesArg::Linear => Axes::Linear,
        AxesArg::Loglog => Axes::LogLog,
    };
    let s = plot::series(&table, &a.x, &a.y).map_err(|e| Invalid(format!("{e:#}")))?;
    let svg = plot::render(&a.title, &a.x, &s, axes, a.slope).map_err(|e| Invalid(format!("{e:#}")))?;
    std::fs::write(&a.output, &svg)?;
    let slope = if a.slope { s.first().and_then(|f| plot::slope(f, axes)) } else { None };
    Ok(Outcome::new(json!({ "output": a.output, "points": table.rows.len(), "slope": slope }), true))
}

/// Whether an error belongs to the validation class (exit code 2).
pub fn is_validation(err: &anyhow::Error) -> bool {
    if err.downcast_ref::<Invalid>().is_some() {
        return true;
    }
    match err.downcast_ref::<mcf_core::Error>() {
        Some(e) => e.is_validation(),
        None => false,
    }
}
