use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use ksmv::field::{chemical_history, ks_residual, sup_growth, ExogenousDrift, FnDrift};
use ksmv::grid::quad::integrate;
use ksmv::grid::{heat_kernel, DensityField, Grid1D, TimeMesh};
use ksmv::io;
use ksmv::kernel::{
    check_hypotheses, default_trials, find_t0, horizon_d, KernelKind, Normalization,
};
use ksmv::mild::{
    compare_histories, march, memory_drift, picard, solve_global, MarginalHistory, SolveMode,
};
use ksmv::particle::{
    histogram, kde_density, simulate_bounded_drift, simulate_particles, InitialLaw,
};
use ksmv::qz::{
    empirical_lp_constant, law_sup, qz_density, qz_density_at_y, verify_bound, QzParams,
};
use ksmv::{Error, Result};

use crate::config::{ModelKind, RunConfig};
use crate::report::{CheckKind, RunReport};

/// Everything a command needs besides its own section of the config.
pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub seed: u64,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn report(&self, command: &str, seeded: bool) -> RunReport {
        RunReport::new(command, &self.cfg.source, seeded.then_some(self.seed))
    }
}

fn sup_l1(grid: &Grid1D, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| grid.l1_norm(&x.iter().zip(y).map(|(u, v)| u - v).collect::<Vec<_>>()))
        .fold(0.0_f64, f64::max)
}

fn write_history(ctx: &Context, name: &str, h: &MarginalHistory) -> Result<()> {
    if ctx.cfg.outputs.csv {
        io::write_history_csv(&ctx.path(&format!("{name}.csv")), h)?;
    }
    if ctx.cfg.outputs.plot {
        let stride = (h.len() / 20).max(1);
        io::write_history_plot(&ctx.path(&format!("{name}.dat")), h, stride)?;
    }
    Ok(())
}

fn write_plot(ctx: &Context, name: &str, header: &[&str], cols: &[&[f64]]) -> Result<()> {
    if ctx.cfg.outputs.plot {
        io::write_plot(&ctx.path(name), header, cols)?;
    }
    Ok(())
}

/// Hypothesis suite, `f_1` checks and the contraction horizon.
pub fn check_kernel(ctx: &Context) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let mut r = ctx.report("check-kernel", false);
    let (spec, grid, mesh) = (cfg.kernel_spec()?, cfg.grid()?, cfg.mesh()?);
    r.phase("hypotheses");
    let rep = check_hypotheses(&spec, mesh.horizon(), &grid, &mesh, &default_trials(&grid))?;
    for item in &rep.items {
        let bound = item.bound.is_finite().then_some(item.bound);
        // H.2 reports a refinement ratio that has to reach its bound
        let kind = if item.name == "H.2" {
            CheckKind::AtLeast
        } else {
            CheckKind::AtMost
        };
        r.record(&item.name, kind, item.value, bound, item.pass);
    }
    let closed_form = spec.kind == KernelKind::KellerSegel && spec.lambda == 0.0;
    // amplitude relative to the heat-normalized kernel
    let amp = spec.chi * spec.normalization.relative_to_heat();
    if closed_form {
        let mean = rep.f1.iter().sum::<f64>() / rep.f1.len() as f64;
        let spread = rep
            .f1
            .iter()
            .fold(0.0_f64, |m, f| m.max((f / mean - 1.0).abs()));
        r.at_most("f1.constant", spread, 0.01);
        r.at_most(
            "f1.value",
            (mean / ((2.0 * PI).sqrt() * amp) - 1.0).abs(),
            0.01,
        );
    }
    r.log("f1", rep.f1.clone());
    r.log("f2", rep.f2.clone());

    r.phase("horizon");
    match find_t0(&spec, 1.0, None) {
        Ok(t0) => {
            r.measure("t0.unit", t0);
            if closed_form {
                let exact = PI / (8.0 * amp * amp);
                r.at_most("t0.closed_form", (t0 / exact - 1.0).abs(), 0.01);
            }
        }
        Err(Error::NoHorizon(m)) => r.flag("t0.unit", false, m),
        Err(e) => return Err(e),
    }
    match find_t0(&spec, cfg.picard.safety, None) {
        Ok(t0) => r.measure("t0.safety", t0),
        Err(Error::NoHorizon(m)) => r.flag("t0.safety", false, m),
        Err(e) => return Err(e),
    }
    let probe: Vec<f64> = (1..=100)
        .map(|i| mesh.horizon() * i as f64 / 100.0)
        .collect();
    let d: Vec<f64> = probe
        .iter()
        .map(|&t| horizon_d(&spec, t))
        .collect::<Result<_>>()?;
    let monotone = d.windows(2).all(|w| w[1] >= w[0]);
    r.flag("d.monotone", monotone, "100-point probe");
    let nodes: Vec<f64> = (1..=mesh.steps()).map(|k| mesh.node(k)).collect();
    write_plot(
        ctx,
        "kernel_f.dat",
        &["t", "f1", "f2"],
        &[&nodes, &rep.f1, &rep.f2],
    )?;
    write_plot(ctx, "kernel_d.dat", &["T", "D"], &[&probe, &d])?;
    Ok(r)
}

fn moments(grid: &Grid1D, row: &[f64]) -> (f64, f64) {
    let x = grid.points();
    let mass = grid.integrate(row);
    let mean = grid.integrate(&row.iter().zip(&x).map(|(p, x)| p * x).collect::<Vec<_>>()) / mass;
    let second = grid.integrate(
        &row.iter()
            .zip(&x)
            .map(|(p, x)| p * x * x)
            .collect::<Vec<_>>(),
    ) / mass;
    (mean, second - mean * mean)
}

fn max_ratio(values: &[f64], times: &[f64], lo: f64, hi: f64) -> f64 {
    let picked: Vec<f64> = values
        .iter()
        .zip(times)
        .filter(|(_, &t)| t >= lo - 1e-12 && t <= hi + 1e-12)
        .map(|(v, _)| *v)
        .collect();
    let max = picked.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v));
    let min = picked.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    max / min
}

/// Full solve with the structural and residual checks.
pub fn solve(ctx: &Context, mode: Option<SolveMode>) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let mut r = ctx.report("solve", false);
    let (grid, mesh) = (cfg.grid()?, cfg.mesh()?);
    let model = cfg.model(&grid)?;
    let p0 = cfg.law_on(&grid)?.density(&grid)?;
    let opts = cfg.solve_options();
    r.phase("solve");
    let sol = solve_global(
        &p0,
        &model,
        &grid,
        &mesh,
        mode.unwrap_or(cfg.solve_mode()),
        &opts,
    )?;
    let h = &sol.history;
    r.measure("windows", sol.windows as f64);
    r.at_most("mass.max_drift", h.max_mass_drift(), 1e-3);
    let times = mesh.nodes();
    let (linf, l2) = (h.linf_scaling(), h.l2_scaling());
    r.measure("scaling.linf_ratio", max_ratio(&linf, &times, 0.01, 1.0));
    r.measure("scaling.l2_ratio", max_ratio(&l2, &times, 0.01, 1.0));
    r.log("mass", h.mass_log().to_vec());
    r.log("sqrt_t_linf", linf.clone());
    r.log("quarter_t_l2", l2.clone());
    for (w, d) in sol.picard_distances.iter().enumerate() {
        r.log(&format!("picard_window_{}", w + 1), d.clone());
    }

    r.phase("write");
    write_history(ctx, "density", h)?;
    write_plot(
        ctx,
        "scaling.dat",
        &["t", "mass", "sqrt_t_linf", "quarter_t_l2"],
        &[&times, h.mass_log(), &linf, &l2],
    )?;

    let last = h.last();
    match (cfg.model.kind, &cfg.p0) {
        (ModelKind::Heat, crate::config::LawSpec::Gaussian { mean, variance }) => {
            let exact =
                grid.sample(|x| heat_kernel(variance + mesh.horizon(), x - mean).unwrap_or(0.0));
            let diff: Vec<f64> = last.iter().zip(&exact).map(|(a, b)| a - b).collect();
            r.at_most("oracle.heat_l1", grid.l1_norm(&diff), 1e-6);
        }
        (ModelKind::Ou { rate }, crate::config::LawSpec::Gaussian { variance, .. }) => {
            let stat = 0.5 / rate;
            let exact = stat + (variance - stat) * (-2.0 * rate * mesh.horizon()).exp();
            let (_, v) = moments(&grid, last);
            r.at_most("oracle.ou_variance", (v / exact - 1.0).abs(), 1e-2);
        }
        _ => {}
    }

    if cfg.model.kind == ModelKind::KellerSegel {
        r.phase("chemical");
        let spec = cfg.kernel_spec()?;
        let chem = cfg.chemical(&grid)?;
        let fields = chemical_history(h, &chem, spec.lambda)?;
        if spec.normalization == Normalization::Heat && spec.kind == KernelKind::KellerSegel {
            let drift = model
                .drift
                .as_ref()
                .expect("keller-segel model has a drift");
            let mut worst = 0.0_f64;
            for (k, f) in fields.iter().enumerate() {
                let b = drift.sample(&grid, mesh.node(k));
                let mem = memory_drift(h, &spec, k)?;
                for i in 0..grid.len() {
                    worst = worst.max((spec.chi * f.gradient[i] - b[i] - mem.values[i]).abs());
                }
            }
            r.at_most("identity", worst, 1e-6);
        }
        let res = ks_residual(h, &fields, spec.lambda)?;
        r.measure("ks_residual.l2", res.l2);
        r.measure("chemical.sup_growth", sup_growth(&chem, &fields));
        if cfg.outputs.csv {
            io::write_fields_csv(&ctx.path("fields.csv"), &grid, &fields)?;
        }
        if cfg.solve.refine {
            r.phase("refine");
            let coarse_grid = Grid1D::new(cfg.disc.half_width, cfg.disc.n / 2)?;
            let coarse_mesh = TimeMesh::new(cfg.disc.horizon, cfg.disc.steps / 2)?;
            let coarse_model = cfg.model(&coarse_grid)?;
            let coarse_p0 = cfg.law_on(&coarse_grid)?.density(&coarse_grid)?;
            let coarse = solve_global(
                &coarse_p0,
                &coarse_model,
                &coarse_grid,
                &coarse_mesh,
                mode.unwrap_or(cfg.solve_mode()),
                &opts,
            )?;
            let coarse_chem = cfg.chemical(&coarse_grid)?;
            let coarse_fields = chemical_history(&coarse.history, &coarse_chem, spec.lambda)?;
            let coarse_res = ks_residual(&coarse.history, &coarse_fields, spec.lambda)?;
            r.at_least("ks_residual.ratio", coarse_res.l2 / res.l2, 1.5);
        }
        write_plot(
            ctx,
            "residual.dat",
            &["t", "residual"],
            &[&times[1..], &res.per_step],
        )?;
    }
    Ok(r)
}

fn particle_counts_label(n: usize) -> String {
    format!("N{n}")
}

/// Particle runs against a march solution, one error table per `N`.
pub fn particles(ctx: &Context) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let mut r = ctx.report("particles", true);
    let (grid, mesh) = (cfg.grid()?, cfg.mesh()?);
    let model = cfg.model(&grid)?;
    let law = cfg.law_on(&grid)?;
    let p0 = law.density(&grid)?;
    r.phase("march");
    let pde = march(&p0, &model, &grid, &mesh, &cfg.solve_options())?;
    let popts = cfg.particle_options(&grid);
    let mut finals = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for &n in &cfg.particles.counts {
        let label = particle_counts_label(n);
        r.phase(&format!("particles {label}"));
        let e = simulate_particles(n, &law, &model, &mesh, ctx.seed, &popts)?;
        r.phase(&format!("kde {label}"));
        let rows = (0..=mesh.steps())
            .map(|k| Ok(kde_density(&e, k, &grid, cfg.particles.bandwidth)?.values))
            .collect::<Result<Vec<_>>>()?;
        let kde = MarginalHistory::from_rows(&grid, &mesh, rows)?;
        let table = compare_histories(&kde, &pde)?;
        let m = mesh.steps();
        r.measure(&format!("l1.{label}"), table.l1[m]);
        finals.0.push(n as f64);
        finals.1.push(table.l1[m]);
        finals.2.push(table.l2[m]);
        finals.3.push(table.linf[m]);
        if cfg.outputs.csv {
            io::write_errors_csv(&ctx.path(&format!("errors_{label}.csv")), &table)?;
            let last = DensityField::new(kde.last().to_vec(), mesh.horizon());
            io::write_densities_csv(&ctx.path(&format!("kde_{label}.csv")), &grid, &[last])?;
        }
        let (mut means, mut vars) = (Vec::new(), Vec::new());
        for k in 0..=m {
            means.push(e.mean(k)?);
            vars.push(e.variance(k)?);
        }
        write_plot(
            ctx,
            &format!("ensemble_{label}.dat"),
            &["t", "mean", "variance"],
            &[&mesh.nodes(), &means, &vars],
        )?;
    }
    if finals.1.len() >= 2 {
        let rise = finals
            .1
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        r.at_most("meanfield.nonincreasing", rise, 0.0);
    }
    if cfg.outputs.csv {
        let mut w = csv::Writer::from_path(ctx.path("convergence.csv")).map_err(Error::from)?;
        w.write_record(["N", "l1", "l2", "linf"])
            .map_err(Error::from)?;
        for i in 0..finals.0.len() {
            w.write_record([
                format!("{}", finals.0[i] as usize),
                format!("{:.16e}", finals.1[i]),
                format!("{:.16e}", finals.2[i]),
                format!("{:.16e}", finals.3[i]),
            ])
            .map_err(Error::from)?;
        }
        w.flush()?;
    }
    write_plot(
        ctx,
        "convergence.dat",
        &["N", "l1", "l2", "linf"],
        &[&finals.0, &finals.1, &finals.2, &finals.3],
    )?;
    Ok(r)
}

/// Picard contraction on `[0, T_0]` and the two-window restart test on
/// `[0, 2 T_0]`.
pub fn picard_cmd(ctx: &Context) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    if cfg.model.kind != ModelKind::KellerSegel {
        return Err(Error::Usage("picard needs the keller-segel model".into()));
    }
    let mut r = ctx.report("picard", false);
    let grid = cfg.grid()?;
    let model = cfg.model(&grid)?;
    let spec = cfg.kernel_spec()?;
    let p0 = cfg.law_on(&grid)?.density(&grid)?;
    let opts = cfg.solve_options();
    let s = cfg.picard;
    let m = cfg.disc.steps;
    let t0 = find_t0(&spec, s.safety, None)?;
    r.measure("t0", t0);
    let mesh = TimeMesh::new(t0, m)?;

    r.phase("picard");
    let res = picard(&p0, &model, &grid, &mesh, s.k_max, s.tol, &opts)?;
    r.flag(
        "picard.converged",
        res.converged,
        format!("{} iterates", res.distances.len()),
    );
    // ratios once the distances are well above roundoff
    let ratios: Vec<f64> = res
        .distances
        .windows(2)
        .filter(|w| w[0] > 1e-12)
        .map(|w| w[1] / w[0])
        .collect();
    match ratios.last() {
        Some(&q) => r.at_most("picard.ratio", q, 0.6),
        None => r.flag(
            "picard.ratio",
            false,
            "fewer than two iterates above roundoff",
        ),
    }
    r.log("picard_distances", res.distances.clone());

    r.phase("march");
    let direct = march(&p0, &model, &grid, &mesh, &opts)?;
    r.at_most(
        "picard.vs_march",
        sup_l1(&grid, res.last().rows(), direct.rows()),
        1e-3,
    );
    write_history(ctx, "picard_density", res.last())?;
    let idx: Vec<f64> = (1..=res.distances.len()).map(|j| j as f64).collect();
    write_plot(
        ctx,
        "picard.dat",
        &["iterate", "distance"],
        &[&idx, &res.distances],
    )?;

    // M steps over [0, 2 T_0], so the halved reference runs at the Picard step
    r.phase("restart");
    let long = TimeMesh::new(2.0 * t0, m)?;
    let restarted = solve_global(
        &p0,
        &model,
        &grid,
        &long,
        SolveMode::PicardWithRestart(s),
        &opts,
    )?;
    r.measure("restart.windows", restarted.windows as f64);
    let one = march(&p0, &model, &grid, &long, &opts)?;
    let fine = march(&p0, &model, &grid, &TimeMesh::new(2.0 * t0, 2 * m)?, &opts)?;
    let fine_rows: Vec<Vec<f64>> = fine.rows().iter().step_by(2).cloned().collect();
    let scheme_error = sup_l1(&grid, one.rows(), &fine_rows);
    r.measure("restart.scheme_error", scheme_error);
    r.at_most(
        "restart.vs_march",
        sup_l1(&grid, restarted.history.rows(), one.rows()),
        5.0 * scheme_error,
    );
    Ok(r)
}

fn z_lattice(centre: f64, t: f64) -> Vec<f64> {
    (0..=20)
        .map(|i| centre + (i as f64 - 10.0) * 0.5 * t.sqrt())
        .collect()
}

/// Closed-form density checks, the Monte Carlo cross-check and the bound.
pub fn qz(ctx: &Context) -> Result<RunReport> {
    let cfg = &ctx.cfg;
    let q = &cfg.qz;
    let mut r = ctx.report("qz", true);
    r.phase("closed form");
    let (mut norm_dev, mut heat_dev, mut at_y_dev) = (0.0_f64, 0.0_f64, 0.0_f64);
    for &t in &q.times {
        for &beta in &q.betas {
            let p = QzParams::new(beta, q.y, q.x, t)?;
            let f = |z: f64| qz_density(&p, z).unwrap_or(f64::NAN);
            let reach = 15.0 * t.sqrt() + beta * t;
            let (lo, hi) = (q.x.min(q.y) - reach, q.x.max(q.y) + reach);
            let mass = integrate(f, lo, q.y, 1e-15, 1e-12).require("qz mass")?
                + integrate(f, q.y, hi, 1e-15, 1e-12).require("qz mass")?;
            norm_dev = norm_dev.max((mass - 1.0).abs());
            at_y_dev = at_y_dev.max((qz_density(&p, q.y)? - qz_density_at_y(&p)?).abs());
        }
        let p = QzParams::new(0.0, q.y, q.x, t)?;
        for z in z_lattice(q.x, t) {
            heat_dev = heat_dev.max((qz_density(&p, z)? - heat_kernel(t, z - q.x)?).abs());
        }
    }
    r.at_most("qz.normalization", norm_dev, 1e-6);
    r.at_most("qz.heat_reduction", heat_dev, 1e-12);
    r.at_most("qz.at_y", at_y_dev, 1e-8);

    r.phase("monte carlo");
    let (beta, y) = (q.mc_beta, q.y);
    let steps = (q.mc_time / q.dt).round() as usize;
    let mesh = TimeMesh::new(q.mc_time, steps)?;
    let sgn = FnDrift::new(move |_, x| beta * (y - x).signum(), Some(beta));
    let e = simulate_bounded_drift(
        &sgn,
        &InitialLaw::point(q.x),
        &mesh,
        q.mc_samples,
        ctx.seed,
        Some(&[steps]),
    )?;
    let h = histogram(e.positions(steps)?, q.range.0, q.range.1, q.bins)?;
    let p = QzParams::new(beta, y, q.x, q.mc_time)?;
    let w = h.width();
    let mut exact = Vec::with_capacity(q.bins);
    for &c in &h.centres {
        let avg = integrate(
            |z| qz_density(&p, z).unwrap_or(f64::NAN),
            c - 0.5 * w,
            c + 0.5 * w,
            1e-14,
            1e-10,
        )
        .require("bin average")?
            / w;
        exact.push(avg);
    }
    let err = h
        .density
        .iter()
        .zip(&exact)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    r.at_most("qz.monte_carlo", err, 2e-2);
    write_plot(
        ctx,
        "qz_mc.dat",
        &["z", "histogram", "stderr", "density"],
        &[&h.centres, &h.density, &h.stderr, &exact],
    )?;

    r.phase("bound");
    let grid = cfg.grid()?;
    let law = cfg.law_on(&grid)?;
    let bb = q.bound_beta;
    let horizon = q.bound_times.iter().fold(0.0_f64, |m, t| m.max(*t));
    let steps = ((horizon / q.dt).round() as usize).max(1);
    let mesh = TimeMesh::new(horizon, steps)?;
    let record: Vec<usize> = q
        .bound_times
        .iter()
        .map(|&t| mesh.nearest(t).max(1))
        .collect();
    let sine = FnDrift::new(move |_, x| bb * x.sin(), Some(bb));
    let e = simulate_bounded_drift(
        &sine,
        &law,
        &mesh,
        q.bound_samples,
        ctx.seed.wrapping_add(1),
        Some(&record),
    )?;
    let rep = verify_bound(&e, &law, sine.sup_bound(), &record, q.range, q.bins)?;
    let violations: usize = rep.checks.iter().map(|c| c.violations.len()).sum();
    r.at_most("qz.bound_violations", violations as f64, 0.0);
    if let Some(bound) = rep.sup_bound {
        let w = (q.range.1 - q.range.0) / q.bins as f64;
        let margin = 3.0 * (rep.sup_density / (q.bound_samples as f64 * w)).sqrt();
        r.at_most("qz.sup_density", rep.sup_density - margin, bound);
    }
    let mut c1 = 0.0_f64;
    for c in &rep.checks {
        c1 = c1.max(empirical_lp_constant(c.sup_density, 1.0, 1.0, c.t, bb));
    }
    r.measure("qz.lp_constant.p1", c1);
    if law_sup(&law).is_some() {
        let p0_l2 = grid.l2_norm(&law.density(&grid)?.values);
        let c2 = rep
            .checks
            .iter()
            .map(|c| empirical_lp_constant(c.sup_density, p0_l2, 2.0, c.t, bb))
            .fold(0.0_f64, f64::max);
        r.measure("qz.lp_constant.p2", c2);
    }
    let ts: Vec<f64> = rep.checks.iter().map(|c| c.t).collect();
    let sups: Vec<f64> = rep.checks.iter().map(|c| c.sup_density).collect();
    let zs: Vec<f64> = rep.checks.iter().map(|c| c.worst_z).collect();
    write_plot(
        ctx,
        "qz_bound.dat",
        &["t", "sup_density", "worst_z"],
        &[&ts, &sups, &zs],
    )?;
    Ok(r)
}

/// Output directory: the flag, then the config, then `KSMV_OUT`, then
/// `ksmv-out`.
pub fn output_dir(flag: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.outputs.directory.clone())
        .or_else(|| std::env::var_os("KSMV_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ksmv-out"))
}
