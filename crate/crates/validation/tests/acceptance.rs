//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use idflow_cli::config::{parse_config, ExperimentConfig, FieldKind, Format};
use idflow_cli::emit::read_json;
use idflow_cli::model::Model;
use idflow_cli::series::{evolve, witness};
use idflow_cli::{run, Command as RunCommand};
use idflow_core::dynamics::{
    channel_metric_derivative, flow_record, flow_series, flow_series_with, propagate, sub_idf, Channel, FlowOptions,
    Hamiltonian, IntegratorOptions, MasterEquation,
};
use idflow_core::families::FactoredFamily;
use idflow_core::fisher::{
    derivatives, idqs, metric_at, numeric_derivatives, qfm, DerivativeOptions, FnFamily, ParameterPoint, SldSet,
    StateFamily,
};
use idflow_core::numerics::Tolerances;
use idflow_core::operator::{validate_density_with, ComplexMatrix, DensityMatrix};
use idflow_core::qubit::{
    bloch_motion, bloch_state, depolarizing, dissip_idf, dissipative_master_equation, pauli, sigma_minus,
    state_space_split, BlochFamily, BlochVector, DissipativeModel, EvolvedBlochFamily,
};
use idflow_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn complex_matrix(r: &mut impl Rng, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
}

fn random_family(r: &mut impl Rng, dim: usize, params: usize) -> FactoredFamily {
    let mut base = complex_matrix(r, dim);
    base.add_scaled(2.0, &ComplexMatrix::identity(dim));
    let dirs = (0..params).map(|_| complex_matrix(r, dim).scale(0.5)).collect();
    FactoredFamily::new(base, dirs).unwrap()
}

fn ball_point(r: &mut impl Rng, r_max: f64) -> [f64; 3] {
    loop {
        let n = [r.gen_range(-r_max..r_max), r.gen_range(-r_max..r_max), r.gen_range(-r_max..r_max)];
        if n.iter().map(|c| c * c).sum::<f64>().sqrt() <= r_max {
            return n;
        }
    }
}

fn numeric_bloch_family() -> FnFamily {
    FnFamily::new(3, |x| Ok(bloch_state(&BlochVector::new([x[0], x[1], x[2]])?)))
}

fn strong() -> DissipativeModel {
    DissipativeModel::new(1.0, 3.0).unwrap()
}

fn grid(t_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect()
}

/// Five-point central difference of equally spaced samples at index `k`.
fn stencil(y: &[f64], k: usize, dt: f64) -> f64 {
    (y[k - 2] - 8.0 * y[k - 1] + 8.0 * y[k + 1] - y[k + 2]) / (12.0 * dt)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let family = numeric_bloch_family();
    let opts = DerivativeOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = ball_point(&mut r, 0.99);
        let norm_sq: f64 = n.iter().map(|c| c * c).sum();
        let value =
            idqs(&metric_at(&family, &ParameterPoint::new(n.to_vec()).unwrap(), &opts).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        worst = worst.max(rel(value, 1.0 / (8.0 * (1.0 - norm_sq).sqrt())));
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-6 && secs < 5.0, format!("max rel err {worst:.2e} (<= 1e-6), {secs:.2} s (< 5 s)"))
}

fn criterion_2() -> Outcome {
    let x0 = ParameterPoint::new(vec![0.0; 3]).unwrap();
    let value = idqs(&metric_at(&numeric_bloch_family(), &x0, &DerivativeOptions::default()).unwrap()).unwrap();
    let err = (value - 0.125).abs();
    check(err <= 1e-10, format!("idqs(0) = {value:?}, |err| {err:.2e} (<= 1e-10)"))
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let dim = if k % 2 == 0 { 2 } else { 3 };
        let params = r.gen_range(1..=3);
        let family = random_family(&mut r, dim, params);
        let h = complex_matrix(&mut r, dim).hermitized();
        let me = MasterEquation::unitary(h).unwrap();
        let x0 = ParameterPoint::new((0..params).map(|_| r.gen_range(-0.1..0.1)).collect()).unwrap();
        let rho0 = family.state(&x0).unwrap();
        let mut bundle = vec![rho0.into_matrix()];
        bundle.extend(derivatives(&family, &x0, &DerivativeOptions::default()).unwrap());
        let mut metrics = Vec::new();
        propagate(&me, &bundle, &grid(1.0, 1000), &IntegratorOptions::default(), |i, _, ys| {
            if i == 0 || i == 1000 {
                let rho = validate_density_with(ys[0].clone(), &Tolerances::TRAJECTORY)?;
                let slds = SldSet::compute(&rho, &ys[1..], Tolerances::DEFAULT.kernel_threshold)?;
                metrics.push(qfm(&rho, &slds)?);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
        worst = worst.max((&metrics[1].g - &metrics[0].g).amax());
    }
    check(worst <= 1e-8, format!("max |g(1) - g(0)| {worst:.2e} over 20 families (<= 1e-8)"))
}

fn criterion_4() -> Outcome {
    let opts = DerivativeOptions::default();
    let axis: Vec<f64> = (0..10).map(|i| -0.55 + 1.1 * i as f64 / 9.0).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for p in [0.1, 0.5, 0.9] {
        let map = depolarizing(p).unwrap();
        let noisy = FnFamily::new(3, move |x| {
            let rho = bloch_state(&BlochVector::new([x[0], x[1], x[2]])?);
            DensityMatrix::new(map.apply(rho.matrix())?)
        });
        for &a in &axis {
            for &b in &axis {
                for &c in &axis {
                    let x0 = ParameterPoint::new(vec![a, b, c]).unwrap();
                    let before = idqs(&metric_at(&BlochFamily, &x0, &opts).unwrap()).unwrap();
                    let after = idqs(&metric_at(&noisy, &x0, &opts).unwrap()).unwrap();
                    worst = worst.max(after - before);
                    if after > before + 1e-12 {
                        violations += 1;
                    }
                }
            }
        }
    }
    check(
        violations == 0,
        format!("{violations} increases over 3 x 10^3 points, max(after - before) {worst:.3e} (<= 1e-12)"),
    )
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let mut sign_failures = 0;
    let mut max_eig = f64::NEG_INFINITY;
    for _ in 0..200 {
        let dim = r.gen_range(2..=3);
        let params = r.gen_range(1..=3);
        let family = random_family(&mut r, dim, params);
        let x0 = ParameterPoint::new((0..params).map(|_| r.gen_range(-0.1..0.1)).collect()).unwrap();
        let rho = family.state(&x0).unwrap();
        let drhos = derivatives(&family, &x0, &DerivativeOptions::default()).unwrap();
        let slds = SldSet::compute(&rho, &drhos, 1e-12).unwrap();
        let metric = qfm(&rho, &slds).unwrap();
        let d = idqs(&metric).unwrap();
        let jump = complex_matrix(&mut r, dim);
        let gamma = r.gen_range(-2.0..2.0);
        let c = channel_metric_derivative(&jump, &rho, &slds).unwrap();
        max_eig = max_eig.max(c.symmetric_eigenvalues().max());
        let s = sub_idf(gamma, &c, &metric, d).unwrap();
        if !(s.abs() <= 1e-10 || s.signum() == -gamma.signum()) {
            sign_failures += 1;
        }
    }
    check(
        sign_failures == 0 && max_eig <= 1e-9,
        format!("{sign_failures} sign violations in 200 draws, max channel eigenvalue {max_eig:.2e} (<= 1e-9)"),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let model = strong();
    let me = dissipative_master_equation(&model);
    let dt = 0.55 / 2000.0;
    let times: Vec<f64> = (0..=2002).map(|k| k as f64 * dt).collect();
    let mut worst_fd: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    let points = [[0.3, 0.2, 0.4], [0.0, 0.0, 0.9f64.sqrt()], [0.9f64.sqrt(), 0.0, 0.0], [0.0, 0.0, -0.5], [0.0; 3]];
    for n0 in points {
        let records = flow_series(&me, &BlochFamily, &ParameterPoint::new(n0.to_vec()).unwrap(), &times)
            .map_err(|e| e.to_string())?;
        let densities: Vec<f64> = records.iter().map(|r| r.idqs.unwrap_or(f64::NAN)).collect();
        let n = BlochVector::new(n0).unwrap();
        for k in 2..records.len() - 2 {
            let t = times[k];
            if t < 0.05 - 1e-12 {
                continue;
            }
            let idf = records[k].idf.ok_or(format!("record at {t} has no flow"))?;
            worst_fd = worst_fd.max(rel(idf, stencil(&densities, k, dt)));
            worst_closed = worst_closed.max(rel(idf, dissip_idf(&n, &model, t).unwrap()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst_fd <= 1e-5 && worst_closed <= 1e-5 && secs < 30.0,
        format!(
            "on [0.05, 0.55], 5 points: vs d(idqs)/dt {worst_fd:.2e}, vs closed form {worst_closed:.2e} (<= 1e-5), {secs:.2} s (< 30 s)"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let [x, _, z] = pauli();
    let h = &z.scale(0.7) + &x.scale(0.3);
    let me = MasterEquation::new(Hamiltonian::Constant(h), vec![Channel::constant(sigma_minus(), 0.8)]).unwrap();
    let spherical = FnFamily::new(3, |x| {
        let (r, th, ph) = (x[0], x[1], x[2]);
        Ok(bloch_state(&BlochVector::new([r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()])?))
    });
    let opts = FlowOptions { derivative: DerivativeOptions { step: 1e-4, richardson: true }, ..Default::default() };
    let times = grid(0.3, 30);
    let (mut worst_ridf, mut worst_ratio): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let (r0, th, ph): (f64, f64, f64) = (r.gen_range(0.1..0.85), r.gen_range(0.3..2.8), r.gen_range(0.1..6.0));
        let cart =
            ParameterPoint::new(vec![r0 * th.sin() * ph.cos(), r0 * th.sin() * ph.sin(), r0 * th.cos()]).unwrap();
        let sph = ParameterPoint::new(vec![r0, th, ph]).unwrap();
        let a = flow_series_with(&me, &BlochFamily, &cart, &times, &opts).map_err(|e| e.to_string())?;
        let b = flow_series_with(&me, &spherical, &sph, &times, &opts).map_err(|e| e.to_string())?;
        for (ra, rb) in a.iter().zip(&b) {
            let (ya, yb) = (ra.ridf.unwrap(), rb.ridf.unwrap());
            worst_ridf = worst_ridf.max((ya - yb).abs() / ya.abs().max(1.0));
            worst_ratio = worst_ratio.max(rel(rb.idqs.unwrap() / ra.idqs.unwrap(), r0 * r0 * th.sin()));
        }
    }
    check(
        worst_ridf <= 1e-8 && worst_ratio <= 1e-8,
        format!(
            "ridf cartesian vs spherical {worst_ridf:.2e}, idqs ratio vs r^2 sin(theta) {worst_ratio:.2e} (<= 1e-8)"
        ),
    )
}

/// Backflow windows of the default points for a given coupling.
fn backflow_windows(coupling: f64) -> (f64, Vec<Vec<(f64, f64)>>) {
    let config =
        parse_config(&format!(r#"{{"model": {{"dissipative": {{"lambda": 1.0, "W": {coupling}}}}}}}"#)).unwrap();
    let model = Model::from_config(&config).unwrap();
    let series = evolve(&config, &model).unwrap();
    let run = witness(&config, &model, &series).unwrap();
    let windows = run.points.iter().map(|p| p.backflow.intervals.iter().map(|i| (i.start, i.end)).collect()).collect();
    (config.times.step(), windows)
}

fn criterion_8() -> Outcome {
    let (_, weak) = backflow_windows(0.3);
    let weak_empty = weak.iter().all(Vec::is_empty);
    let (dt, strong_windows) = backflow_windows(3.0);
    let opening = 2.0 * std::f64::consts::PI / 35f64.sqrt();
    let count = strong_windows.iter().map(Vec::len).min().unwrap_or(0);
    let first = strong_windows.iter().map(|w| w.first().map_or(f64::NAN, |i| i.0)).fold(f64::NAN, f64::max);
    let opens = strong_windows.iter().all(|w| w.first().is_some_and(|i| (i.0 - opening).abs() <= dt));
    check(
        weak_empty && count >= 2 && opens,
        format!(
            "W=0.3 empty: {weak_empty}; W=3 windows per point >= {count}; first opening {first:.4} vs 2pi/d = {opening:.4} +- {dt}"
        ),
    )
}

/// The same run checked against the windows the closed form actually
/// predicts: open at the zeros of `h`, close at the zeros of its derivative.
fn criterion_8_closed_form_windows() -> Outcome {
    let (dt, windows) = backflow_windows(3.0);
    let m = strong();
    let mut worst: f64 = 0.0;
    for w in &windows {
        for (k, &(start, end)) in w.iter().enumerate() {
            let k = k as u32 + 1;
            worst = worst.max((start - m.h_zero(k).unwrap()).abs());
            if end < 3.0 {
                worst = worst.max((end - m.h_dot_zero(k).unwrap()).abs());
            }
        }
    }
    let count = windows.iter().map(Vec::len).min().unwrap_or(0);
    check(
        count >= 2 && worst <= dt,
        format!("{count}+ windows per point, max endpoint offset from h zeros / h' zeros {worst:.2e} (<= {dt})"),
    )
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let m = strong();
    let me = dissipative_master_equation(&m);
    let (mut worst_sum, mut worst_jac, mut worst_volume): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut drawn = 0;
    while drawn < 100 {
        let tau = r.gen_range(0.0..3.0);
        if m.h(tau).abs() < 0.1 {
            continue;
        }
        drawn += 1;
        let n0 = BlochVector::new(ball_point(&mut r, 0.9)).unwrap();
        let x0 = ParameterPoint::new(n0.components().to_vec()).unwrap();
        let split = state_space_split(&n0, &m, tau).map_err(|e| e.to_string())?;

        let family = EvolvedBlochFamily { model: m, tau };
        let rho = family.state(&x0).unwrap();
        let drhos = numeric_derivatives(&family, &x0, 1e-5).unwrap();
        let rec = flow_record(&me, tau, rho.matrix(), &drhos).map_err(|e| e.to_string())?;
        let ridf = rec.ridf.ok_or("record without ridf")?;
        worst_sum = worst_sum.max((split.orbit + split.jacobian - ridf).abs() / ridf.abs().max(1.0));

        // d/dt ln|det J| of the affine map n0 -> n(t), by differences in both n0 and t
        let log_det = |t: f64| {
            let base = bloch_motion(&n0, &m, t).components();
            let mut j = nalgebra::Matrix3::zeros();
            for mu in 0..3 {
                let mut c = n0.components();
                c[mu] += 1e-3;
                let moved = bloch_motion(&BlochVector::new(c).unwrap(), &m, t).components();
                for i in 0..3 {
                    j[(i, mu)] = (moved[i] - base[i]) / 1e-3;
                }
            }
            j.determinant().abs().ln()
        };
        let e = 2.5e-4;
        let oracle = (log_det(tau - 2.0 * e) - 8.0 * log_det(tau - e) + 8.0 * log_det(tau + e)
            - log_det(tau + 2.0 * e))
            / (12.0 * e);
        worst_volume = worst_volume.max((split.jacobian - oracle).abs() / oracle.abs().max(1.0));
        let gamma = m.gamma(tau).unwrap();
        worst_jac = worst_jac.max((split.jacobian + 2.0 * gamma).abs() / gamma.abs().max(1.0));
    }
    check(
        worst_sum <= 1e-8 && worst_jac <= 1e-8 && worst_volume <= 1e-6,
        format!(
            "orbit + jacobian vs ridf {worst_sum:.2e}, jacobian vs -2 gamma {worst_jac:.2e} (<= 1e-8), \
             jacobian vs d/dt ln det of the Bloch map {worst_volume:.2e} (<= 1e-6)"
        ),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = ExperimentConfig::default();
    let formats = [Format::Csv, Format::Json, Format::Svg];
    let start = Instant::now();
    for cmd in [RunCommand::Qfm, RunCommand::Evolve, RunCommand::Field, RunCommand::Witness] {
        run(cmd, &config, dir.path(), &formats).map_err(|e| e.to_string())?;
    }
    let secs = start.elapsed().as_secs_f64();
    let dt = config.times.step();
    let run = read_json(&dir.path().join("evolve.json")).map_err(|e| e.to_string())?;
    let series = &run.series;
    if series.len() != 4 {
        return Err(format!("{} series instead of 4", series.len()));
    }

    let d0: Vec<f64> = series.iter().map(|s| s.records[0].idqs.unwrap()).collect();
    let equal = d0[..3].iter().all(|&d| rel(d, d0[0]) <= 1e-12);
    let above = d0[..3].iter().all(|&d| d > d0[3]) && (d0[3] - 0.125).abs() <= 1e-12;

    let steps = series[0].records.len();
    let mut disagreements = 0;
    for k in 0..steps {
        let signs: Vec<f64> =
            series.iter().filter_map(|s| s.records[k].idf).filter(|v| v.abs() > 1e-12).map(f64::signum).collect();
        if signs.windows(2).any(|w| w[0] != w[1]) {
            disagreements += 1;
        }
    }

    let m = strong();
    let zeros: Vec<f64> = (1..).map_while(|k| m.h_zero(k)).take_while(|&t| t < config.times.t_max).collect();
    let mut unmatched_minima = 0;
    let mut missed_zeros = 0;
    for s in series {
        let d: Vec<f64> = s.records.iter().map(|r| r.idqs.unwrap_or(f64::NAN)).collect();
        let minima: Vec<f64> =
            (1..d.len() - 1).filter(|&k| d[k] <= d[k - 1] && d[k] <= d[k + 1]).map(|k| s.records[k].t).collect();
        unmatched_minima += minima.iter().filter(|&&t| zeros.iter().all(|z| (t - z).abs() > dt)).count();
        missed_zeros += zeros.iter().filter(|&&z| minima.iter().all(|t| (t - z).abs() > dt)).count();
    }

    let expected: Vec<(FieldKind, f64)> = [
        (FieldKind::StateIdqs, [0.02, 0.5, 1.0]),
        (FieldKind::Idqs, [0.02, 0.5, 1.0]),
        (FieldKind::Idf, [0.1, 0.5, 1.0]),
        (FieldKind::Ridf, [0.1, 0.5, 1.0]),
    ]
    .into_iter()
    .flat_map(|(f, ts)| ts.into_iter().map(move |t| (f, t)))
    .collect();
    let missing: Vec<String> = expected
        .iter()
        .map(|&(f, t)| format!("{}_t{t:?}", f.name()))
        .filter(|stem| !["csv", "svg"].iter().all(|ext| dir.path().join(format!("{stem}.{ext}")).exists()))
        .collect();

    check(
        equal
            && above
            && disagreements == 0
            && unmatched_minima == 0
            && missed_zeros == 0
            && missing.is_empty()
            && secs < 60.0,
        format!(
            "t=0 idqs {d0:.4?}; sign disagreements {disagreements}; minima off h zeros {unmatched_minima}, \
             h zeros without minimum {missed_zeros}; missing panels {missing:?}; {secs:.1} s (< 60 s)"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1 qubit idqs closed form", criterion_1),
        ("2 center value", criterion_2),
        ("3 unitary invariance", criterion_3),
        ("4 depolarizing contraction", criterion_4),
        ("5 sub-flow sign theorem", criterion_5),
        ("6 flow decomposition consistency", criterion_6),
        ("7 reparameterization", criterion_7),
        ("8 regime behavior", criterion_8),
        ("8b regime behavior, closed-form windows", criterion_8_closed_form_windows),
        ("9 state-space split", criterion_9),
        ("10 reference run", criterion_10),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
