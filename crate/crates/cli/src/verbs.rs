use anyhow::Result;
use diffsetlab::arcs::{
    classify_frequency, fit_minor_exponent, fixtures_to_csv, gauss_report, hua_table,
    oscillatory_integral, oscillatory_integral_gl, verify_major_estimate, verify_minor_estimate,
    weyl_ratio_table, FixtureRow,
};
use diffsetlab::diffset::{
    count_monomial_differences, density_upper_bound, extremal_table, greedy_free_set,
    has_polynomial_configuration, max_free_set_exact, CountBackend,
};
use diffsetlab::fourier::{balance_function, dft, EmbeddingGroup};
use diffsetlab::increment::{bound_calculator, dichotomy, iterate, l2_mass_table};
use diffsetlab::io::point_set_to_string;
use diffsetlab::lifting::{build_lifted_set, sumset_reduce};
use diffsetlab::rational;
use num_bigint::BigUint;
use serde_json::json;

use crate::args::{Backend, Common, RunKind, Verb};
use crate::input::{self, require, usage};
use crate::output::{Outcome, Session};

pub fn dispatch(sess: &mut Session, c: &Common, verb: &Verb) -> Result<Outcome> {
    match verb {
        Verb::Count { backend } => count(sess, c, *backend),
        Verb::Witness { elems, d_max } => {
            let a = input::int_set(sess, c, elems)?;
            let n = input::n(sess, c)?;
            let p = input::poly(sess, c)?;
            sess.param("d_max", d_max);
            let w = has_polynomial_configuration(&a, n, &p, *d_max)?;
            Outcome::new(json!({ "present": w.is_some(), "witness": w }))
        }
        Verb::Greedy => {
            let n = input::n(sess, c)?;
            let p = input::poly(sess, c)?;
            let set = greedy_free_set(n, &p)?;
            Outcome::new(json!({ "size": set.len(), "set": set }))
        }
        Verb::ExactMax { budget } => {
            let n = input::n(sess, c)?;
            let p = input::poly(sess, c)?;
            sess.param("budget", budget);
            Outcome::new(max_free_set_exact(n, &p, *budget)?)
        }
        Verb::Spectrum { bins } => spectrum(sess, c, *bins),
        Verb::Classify { alpha } => {
            let alpha: Vec<_> = alpha
                .split(',')
                .map(|s| input::ratio("alpha", s))
                .collect::<Result<_>>()?;
            sess.param(
                "alpha",
                alpha.iter().map(rational::display).collect::<Vec<_>>(),
            );
            let eta = input::eta(sess, c)?;
            let m = input::m_u64(sess, c)?;
            let k = input::k_or(sess, c, alpha.len());
            Outcome::new(classify_frequency(&alpha, &eta, m, k)?)
        }
        Verb::Gauss {
            a,
            q,
            exhaustive_cells,
            c_hua,
        } => gauss(sess, c, a, *q, *exhaustive_cells, *c_hua),
        Verb::Vint { beta, tol } => {
            let beta = input::list_f64("beta", beta)?;
            let n = input::n(sess, c)?;
            sess.param("beta", &beta);
            sess.param("tol", tol);
            let adaptive = oscillatory_integral(&beta, n as f64, *tol)?;
            let gl = oscillatory_integral_gl(&beta, n as f64, *tol)?;
            let gap = (adaptive.value() - gl.value()).norm();
            Outcome::new(json!({ "adaptive": adaptive, "gauss_legendre": gl, "agreement": gap }))
        }
        Verb::SweepMinor => sweep_minor(sess, c),
        Verb::SweepMajor { q, g, centres } => sweep_major(sess, c, *q, *g, *centres),
        Verb::WeylRatio { ns } => {
            let ns: Vec<u64> = input::list_i64("ns", ns)?
                .into_iter()
                .map(|x| u64::try_from(x).map_err(|_| usage("--ns must be positive")))
                .collect::<Result<_>>()?;
            let trials = c.trials.unwrap_or(32);
            sess.param("ns", &ns);
            sess.param("trials", trials);
            let rows = weyl_ratio_table(&ns, trials, c.seed)?;
            let csv = fixtures_to_csv(&rows);
            Ok(Outcome::new(&rows)?.artifact("weyl_ratio.csv", csv))
        }
        Verb::FitNu { ms } => {
            let eta = input::eta(sess, c)?;
            let k = input::k_or(sess, c, 2);
            let eps = input::eps_or(sess, c, diffsetlab::LabConstants::new(k)?.eps)?;
            let ms: Vec<u64> = input::list_i64("ms", ms)?
                .into_iter()
                .map(|x| u64::try_from(x).map_err(|_| usage("--ms must be positive")))
                .collect::<Result<_>>()?;
            let trials = c.trials.unwrap_or(256);
            sess.param("ms", &ms);
            sess.param("trials", trials);
            Outcome::new(fit_minor_exponent(&eta, &ms, k, &eps, trials, c.seed)?)
        }
        Verb::Dichotomy => {
            let b = input::point_set(sess, c)?;
            let lab = input::constants(sess, c, b.k())?;
            Outcome::new(dichotomy(&b, &lab)?)
        }
        Verb::Iterate { steps } => run_iterate(sess, c, *steps),
        Verb::L2table { q_cap } => {
            let b = input::point_set(sess, c)?;
            let lab = input::constants(sess, c, b.k())?;
            sess.param("q_cap", q_cap);
            let t = l2_mass_table(&b, &lab, *q_cap)?;
            let rows: Vec<String> = t
                .rows
                .iter()
                .map(|r| {
                    format!(
                        "{},{:e},{:e},{:e},{:e},{}",
                        r.q, r.mass, r.inflated, r.deflated, r.discretization, r.lattice_points
                    )
                })
                .collect();
            let csv = sess.csv(
                "q,mass,inflated,deflated,discretization,lattice_points",
                &rows,
            );
            Ok(Outcome::new(&t)?.artifact("l2table.csv", csv))
        }
        Verb::Bound => bound(sess, c),
        Verb::Lift { elems } => lift(sess, c, elems),
        Verb::SumsetReduce { elems, elems_b } => {
            let a = input::list_i64("elems", elems)?;
            let b = input::list_i64("elems-b", elems_b)?;
            sess.param("A", &a);
            sess.param("B", &b);
            let n = input::n(sess, c)?;
            Outcome::new(sumset_reduce(&a, &b, n)?)
        }
        Verb::Run {
            kind,
            steps,
            budget,
        } => run(sess, c, *kind, *steps, *budget),
    }
}

fn count(sess: &mut Session, c: &Common, backend: Backend) -> Result<Outcome> {
    let b = input::point_set(sess, c)?;
    let eps = input::eps_or(sess, c, rational::int(1))?;
    let backend = match backend {
        Backend::Direct => CountBackend::Direct,
        Backend::Fft => CountBackend::Fft,
    };
    sess.param("backend", backend);
    let n = count_monomial_differences(&b, &eps, backend)?;
    Outcome::new(json!({ "count": n, "size": b.len(), "density": rational::display(&b.density()) }))
}

fn spectrum(sess: &mut Session, c: &Common, bins: usize) -> Result<Outcome> {
    let b = input::point_set(sess, c)?;
    let qbox = b.aniso_box()?.clone();
    let eta = match &c.eta {
        Some(_) => Some(input::eta(sess, c)?),
        None => None,
    };
    sess.param("bins", bins);
    let group = EmbeddingGroup::for_box(&qbox, eta.as_ref())?;
    let f = balance_function(&b)?.to_lattice_function()?;
    let spec = dft(&f, &group)?;
    if let Some(dir) = &c.out {
        std::fs::create_dir_all(dir)?;
        spec.export(&dir.join("spectrum"))?;
    }
    let hist = spec.magnitude_histogram(bins);
    let rows: Vec<String> = hist
        .iter()
        .map(|h| format!("{:e},{:e},{}", h.lower, h.upper, h.count))
        .collect();
    let csv = sess.csv("lower,upper,count", &rows);
    Ok(Outcome::new(json!({
        "lengths": group.lengths(),
        "parseval_sum": spec.parseval_sum(),
        "histogram": hist,
    }))?
    .artifact("spectrum_histogram.csv", csv))
}

fn gauss(
    sess: &mut Session,
    c: &Common,
    a: &Option<String>,
    q: u64,
    cells: u64,
    c_hua: f64,
) -> Result<Outcome> {
    sess.param("q", q);
    sess.param("c_hua", c_hua);
    if let Some(a) = a {
        let a = input::list_i64("a", a)?;
        sess.param("a", &a);
        return Outcome::new(gauss_report(&a, q, c_hua)?);
    }
    let k = input::k_or(sess, c, 2);
    let samples = c.trials.unwrap_or(256);
    sess.param("exhaustive_cells", cells);
    sess.param("samples", samples);
    let rows = hua_table(k, q, cells, samples, c.seed)?;
    let max = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let fixture: Vec<FixtureRow> = rows
        .iter()
        .map(|r| FixtureRow {
            k,
            m_or_n: r.q,
            q: r.q,
            eta: String::new(),
            quantity: "hua_ratio".into(),
            empirical_constant: r.max_ratio,
            seed: c.seed,
        })
        .collect();
    Ok(Outcome::new(json!({ "max_ratio": max, "rows": rows }))?
        .artifact("hua.csv", fixtures_to_csv(&fixture)))
}

fn sweep_minor(sess: &mut Session, c: &Common) -> Result<Outcome> {
    let eta = input::eta(sess, c)?;
    let m = input::m_u64(sess, c)?;
    let k = input::k_or(sess, c, 2);
    let eps = input::eps_or(sess, c, diffsetlab::LabConstants::new(k)?.eps)?;
    let trials = c.trials.unwrap_or(1000);
    let c_lab = match &c.c_lab_upper {
        Some(s) => rational::to_f64(&input::ratio("C-lab", s)?),
        None => rational::to_f64(&diffsetlab::LabConstants::new(k)?.c_upper),
    };
    sess.param("trials", trials);
    sess.param("C_lab", c_lab);
    let report = verify_minor_estimate(&eta, m, k, &eps, trials, c.seed, c_lab)?;
    if !report.advisory_ok {
        eprintln!("warning: M = {m} is below eta^-C_lab; minor-arc ratios may not be meaningful");
    }
    Outcome::new(report)
}

fn sweep_major(sess: &mut Session, c: &Common, q: u64, g: i64, centres: u64) -> Result<Outcome> {
    let eta = input::eta(sess, c)?;
    let m = input::m_u64(sess, c)?;
    let k = input::k_or(sess, c, 2);
    let eps = input::eps_or(sess, c, diffsetlab::LabConstants::new(k)?.eps)?;
    sess.param("q", q);
    sess.param("g", g);
    sess.param("centres", centres);
    Outcome::new(verify_major_estimate(
        q, &eta, m, k, &eps, g, centres, c.seed,
    )?)
}

fn run_iterate(sess: &mut Session, c: &Common, steps: usize) -> Result<Outcome> {
    let b = input::point_set(sess, c)?;
    let lab = input::constants(sess, c, b.k())?;
    sess.param("steps", steps);
    let trace = iterate(&b, &lab, steps)?;
    let jsonl = sess.jsonl(&trace.to_jsonl()?)?;
    let densities: Vec<String> = trace.densities().iter().map(rational::display).collect();
    let rows: Vec<String> = trace
        .steps
        .iter()
        .map(|s| {
            format!(
                "{},{},{},{},{}",
                s.n,
                s.m_n,
                rational::display(&s.delta_n),
                s.size,
                s.outcome.kind()
            )
        })
        .collect();
    let csv = sess.csv("n,M_n,delta_n,size,outcome", &rows);
    let mut out = Outcome::new(json!({
        "stop": trace.stop,
        "steps": trace.steps.len(),
        "densities": densities,
    }))?
    .artifact("trace.jsonl", jsonl)
    .artifact("trace.csv", csv);
    out.timings = json!({ "step_runtimes_ms": trace.runtimes_ms });
    Ok(out)
}

fn bound(sess: &mut Session, c: &Common) -> Result<Outcome> {
    let s = require(&c.m, "M")?;
    let m: BigUint = s
        .parse()
        .map_err(|_| usage(format!("--M: `{s}` is not a positive integer")))?;
    sess.param("M", m.to_string());
    let k = input::k_or(sess, c, 2);
    let cc = match &c.c_lab_upper {
        Some(s) => input::ratio("C-lab", s)?,
        None => rational::int(1),
    };
    sess.param("C_lab", rational::display(&cc));
    Outcome::new(bound_calculator(&m, k, &cc)?)
}

fn lift(sess: &mut Session, c: &Common, elems: &Option<String>) -> Result<Outcome> {
    let a = input::int_set(sess, c, elems)?;
    let n = input::n(sess, c)?;
    let p = input::poly(sess, c)?;
    let l = build_lifted_set(&a, n, &p)?;
    let pts = point_set_to_string(&l.set);
    Ok(Outcome::new(&l)?.artifact("lifted.pts", pts))
}

fn extremal(sess: &mut Session, c: &Common, budget: u64) -> Result<Outcome> {
    let n = input::n(sess, c)?;
    let p = input::poly(sess, c)?;
    sess.param("budget", budget);
    let cc = match &c.c_lab_upper {
        Some(s) => rational::to_f64(&input::ratio("C-lab", s)?),
        None => 1.0,
    };
    sess.param("C_lab", cc);
    let table = extremal_table(n, &p, budget)?;
    let mut rows = Vec::new();
    let mut lines = String::new();
    for e in &table {
        let greedy = greedy_free_set(e.n, &p)?.len();
        let bound = if e.n >= 16 {
            Some(density_upper_bound(&BigUint::from(e.n as u64), &p, cc)?)
        } else {
            None
        };
        let density = e.size as f64 / e.n as f64;
        rows.push(format!(
            "{},{},{},{},{:.6},{}",
            e.n,
            e.size,
            e.proven,
            greedy,
            density,
            bound.map_or(String::new(), |b| format!("{b:.6}"))
        ));
        lines.push_str(
            &json!({
                "N": e.n, "exact_max": e.size, "proven": e.proven, "greedy": greedy,
                "exact_density": density, "density_bound": bound,
            })
            .to_string(),
        );
        lines.push('\n');
    }
    let csv = sess.csv(
        "N,exact_max,proven,greedy,exact_density,density_bound",
        &rows,
    );
    let jsonl = sess.jsonl(&lines)?;
    Ok(Outcome::new(json!({
        "rows": table.len(),
        "note": "the density bound is asymptotic and need not dominate at these N",
    }))?
    .artifact("extremal.csv", csv)
    .artifact("extremal.jsonl", jsonl))
}

fn run(
    sess: &mut Session,
    c: &Common,
    kind: RunKind,
    steps: usize,
    budget: u64,
) -> Result<Outcome> {
    sess.param("kind", kind.name());
    let mut out = match kind {
        RunKind::Count => count(sess, c, Backend::Fft)?,
        RunKind::Dichotomy => dispatch(sess, c, &Verb::Dichotomy)?,
        RunKind::Iterate => run_iterate(sess, c, steps)?,
        RunKind::SweepMinor => sweep_minor(sess, c)?,
        RunKind::SweepMajor => sweep_major(sess, c, 1, 8, 64)?,
        RunKind::Lift => lift(sess, c, &None)?,
        RunKind::Extremal => extremal(sess, c, budget)?,
        RunKind::Bound => bound(sess, c)?,
    };
    let line = sess.jsonl(&json!({ "kind": kind.name(), "result": out.result }).to_string())?;
    out.artifacts.push((format!("{}.jsonl", kind.name()), line));
    Ok(out)
}
