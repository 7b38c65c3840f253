use std::path::Path;

use branched_core::fourier::{char_function, distinguish, RepJson, Representation, SigsJson};
use branched_core::freebasis::{predicted_generator_counts, GeneratorBasis};
use branched_core::hopf::{exp_star, gl_coproduct, gl_product, log_star, parse_forest_or_series, ForestSeries};
use branched_core::poly::FieldsJson;
use branched_core::rde::{branched_euler_solve, generator_fields, geometric_euler_solve, psi_driver};
use branched_core::roughpath::{
    bm_signature_samples, esig_bm_closed_form, esig_bm_monte_carlo, extend_signature, ito_lift, moment_bound_check,
    signature_via_tensor, simulate_bm, GridRoughPath, LiftJson, SamplePath, SignatureJson,
};
use branched_core::scalar::{format_q, parse_q, Scalar, Q};
use branched_core::trees::{enumerate_forests, enumerate_forests_upto, enumerate_trees};
use serde_json::json;

use crate::output::{
    parse_matrix, parse_vector, read_json, to_f64_matrix, word_text, write_artifact, CliError, CliResult, Out,
};
use crate::{BasisCmd, BasisSource, EsigCmd, FourierCmd, HopfCmd, LiftCmd, PathLiftArgs, RdeCmd, RewriteArgs, SigArgs, SimCmd, TreesCmd};

pub fn trees(out: &Out, cmd: TreesCmd) -> CliResult {
    let TreesCmd::Enum { nodes, labels, forests } = cmd;
    if labels == 0 {
        return Err(CliError::Usage("--labels must be at least 1".into()));
    }
    let items: Vec<String> = if forests {
        enumerate_forests(nodes, labels).iter().map(|f| f.to_string()).collect()
    } else {
        enumerate_trees(nodes, labels).iter().map(|t| t.to_string()).collect()
    };
    let kind = if forests { "forests" } else { "trees" };
    out.emit(
        || {
            let mut s = items.join("\n");
            if !s.is_empty() {
                s.push('\n');
            }
            s + &format!("{} {kind}", items.len())
        },
        || json!({ "kind": kind, "nodes": nodes, "labels": labels, "count": items.len(), "items": items }),
    );
    Ok(())
}

fn series_arg(src: &str) -> Result<ForestSeries<Q>, CliError> {
    Ok(parse_forest_or_series(src, None)?)
}

fn emit_series(out: &Out, s: &ForestSeries<Q>) {
    out.emit(|| s.to_string(), || json!(s.to_json()));
}

pub fn hopf(out: &Out, cmd: HopfCmd) -> CliResult {
    match cmd {
        HopfCmd::Star { a, b, level } => {
            let (a, b) = (series_arg(&a)?, series_arg(&b)?);
            let a = a.with_truncation(level);
            emit_series(out, &gl_product(&a, &b));
        }
        HopfCmd::Cop { a } => {
            let t = gl_coproduct(&series_arg(&a)?);
            let terms: Vec<(String, String, Q)> = t.into_iter().map(|((l, r), c)| (l.to_string(), r.to_string(), c)).collect();
            out.emit(
                || {
                    terms
                        .iter()
                        .map(|(l, r, c)| format!("{}*({l} ⊗ {r})", format_q(c)))
                        .collect::<Vec<_>>()
                        .join(" + ")
                },
                || json!(terms.iter().map(|(l, r, c)| json!({ "left": l, "right": r, "coeff": format_q(c) })).collect::<Vec<_>>()),
            );
        }
        HopfCmd::Exp { a, level } => emit_series(out, &exp_star(&series_arg(&a)?.with_truncation(Some(level)), level)?),
        HopfCmd::Log { g, level } => emit_series(out, &log_star(&series_arg(&g)?.with_truncation(Some(level)), level)?),
    }
    Ok(())
}

pub fn basis(out: &Out, cmd: BasisCmd) -> CliResult {
    let BasisCmd::Gen { max_degree, labels, out: file } = cmd;
    if labels == 0 || max_degree == 0 {
        return Err(CliError::Usage("--max-degree and --labels must be positive".into()));
    }
    let b = GeneratorBasis::compute(max_degree, labels)?;
    if let Some(path) = &file {
        b.save(path)?;
    }
    let gens: Vec<String> = b.generators().iter().map(|g| g.to_string()).collect();
    let counts = b.counts_by_degree();
    let predicted: Vec<String> = predicted_generator_counts(max_degree, labels).iter().map(|c| c.to_string()).collect();
    out.emit(
        || {
            let mut s = String::new();
            for (j, (g, deg)) in gens.iter().zip(b.generator_degrees()).enumerate() {
                s += &format!("τ{} = {g}  (degree {deg})\n", j + 1);
            }
            s += &format!("counts by degree: {counts:?}\npredicted:        [{}]\n", predicted.join(", "));
            s + &format!("{} generators", gens.len())
        },
        || json!({ "max_degree": max_degree, "labels": labels, "count": gens.len(), "generators": gens, "counts_by_degree": counts, "predicted": predicted }),
    );
    Ok(())
}

fn load_basis(src: &BasisSource, fallback_degree: usize, fallback_labels: u32) -> Result<GeneratorBasis, CliError> {
    match &src.basis {
        Some(p) => Ok(GeneratorBasis::load(p)?),
        None => Ok(GeneratorBasis::compute(
            src.max_degree.unwrap_or(fallback_degree),
            src.labels.unwrap_or(fallback_labels),
        )?),
    }
}

pub fn rewrite(out: &Out, args: RewriteArgs) -> CliResult {
    let s = series_arg(&args.series)?;
    let b = load_basis(&args.source, s.max_degree().max(1), s.max_label().max(1))?;
    let words = b.rewrite_to_words(&s)?;
    let back = b.rewrite_to_forests(&words, Some(b.degree_bound()))?;
    if !(&back - &s.with_truncation(Some(b.degree_bound()))).is_empty() {
        return Err(CliError::Core(branched_core::Error::Invariant("rewrite does not round-trip".into())));
    }
    out.emit(
        || {
            if words.is_empty() {
                return "0".into();
            }
            let mut s = String::new();
            for (k, (w, c)) in words.iter().enumerate() {
                let neg = c < &Q::from_integer(0.into());
                let sign = match (k, neg) {
                    (0, false) => "",
                    (0, true) => "-",
                    (_, false) => " + ",
                    (_, true) => " - ",
                };
                s += &format!("{sign}{}*{}", format_q(&if neg { -c.clone() } else { c.clone() }), word_text(w));
            }
            s
        },
        || json!(words.iter().map(|(w, c)| json!({ "word": w, "coeff": format_q(c) })).collect::<Vec<_>>()),
    );
    Ok(())
}

pub fn sim(out: &Out, cmd: SimCmd) -> CliResult {
    let SimCmd::Bm { dim, steps, cov, seed, horizon, out: file } = cmd;
    let cov = match cov {
        Some(c) => to_f64_matrix(&parse_matrix(&c)?),
        None => (0..dim).map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
    };
    let path = simulate_bm(dim, steps, &cov, horizon, seed)?;
    match &file {
        Some(p) => {
            write_artifact(Some(p), &path)?;
            out.emit(
                || format!("{dim}-dimensional Brownian path, {steps} steps, seed {seed}, written to {}", p.display()),
                || json!({ "dim": dim, "steps": steps, "seed": seed, "out": p }),
            );
        }
        None => write_artifact(None, &path)?,
    }
    Ok(())
}

fn lift_from_path(args: &PathLiftArgs) -> Result<GridRoughPath, CliError> {
    let path: SamplePath = read_json(&args.path)?;
    path.validate()?;
    Ok(ito_lift(&path.rationalize(args.bits), parse_q(&args.p)?)?)
}

pub fn lift(out: &Out, cmd: LiftCmd) -> CliResult {
    let LiftCmd::Ito { from, out: file } = cmd;
    let rp = lift_from_path(&from)?;
    let artifact = LiftJson::from_rough_path(&rp);
    match &file {
        Some(p) => {
            write_artifact(Some(p), &artifact)?;
            out.emit(
                || format!("Itô lift, {} steps, level {}, written to {}", rp.steps(), rp.level(), p.display()),
                || json!({ "steps": rp.steps(), "level": rp.level(), "out": p }),
            );
        }
        None => write_artifact(None, &artifact)?,
    }
    Ok(())
}

pub fn sig(out: &Out, args: SigArgs) -> CliResult {
    let rp = match (&args.lift, &args.path) {
        (Some(l), _) => read_json::<LiftJson>(l)?.to_rough_path()?,
        (None, Some(p)) => lift_from_path(&PathLiftArgs {
            path: p.clone(),
            p: args.p.clone(),
            bits: args.bits,
        })?,
        (None, None) => return Err(CliError::Usage("give --lift or --path".into())),
    };
    let s = extend_signature(&rp, args.level)?;
    if args.check {
        let basis = GeneratorBasis::shared(args.level, rp.dim().max(1))?;
        let t = signature_via_tensor(&rp, args.level, &basis)?;
        if !(&s - &t).is_empty() {
            return Err(CliError::Tolerance("⋆-route and tensor-route signatures differ".into()));
        }
    }
    let artifact = SignatureJson::from_series(&s, args.level);
    if let Some(p) = &args.out {
        write_artifact(Some(p), &artifact)?;
    }
    out.emit(|| s.to_string(), || json!(artifact));
    Ok(())
}

pub fn esig(out: &Out, cmd: EsigCmd) -> CliResult {
    match cmd {
        EsigCmd::Closed { law, level } => {
            let (cov, t) = (parse_matrix(&law.cov)?, parse_q(&law.t)?);
            emit_series(out, &esig_bm_closed_form(&cov, &t, level)?);
        }
        EsigCmd::Mc { law, level, samples, steps, seed, band } => {
            let (cov, t) = (parse_matrix(&law.cov)?, parse_q(&law.t)?);
            let exact = esig_bm_closed_form(&cov, &t, level)?.to_f64();
            let mc = esig_bm_monte_carlo(&to_f64_matrix(&cov), Scalar::to_f64(&t), level, samples, steps, seed)?;
            let d = cov.len() as u32;
            let rows: Vec<EsigRow> = enumerate_forests_upto(level, d)
                .into_iter()
                .map(|f| EsigRow::new(f.to_string(), mc.mean.coeff(&f), mc.stderr.coeff(&f), exact.coeff(&f)))
                .collect();
            let worst = rows.iter().map(|r| r.z).fold(0.0, f64::max);
            out.emit(
                || esig_table(&rows) + &format!("\n{samples} samples, largest deviation {worst:.2} standard errors (band {band})"),
                || json!({ "samples": samples, "band": band, "max_z": worst, "rows": rows.iter().map(EsigRow::to_json).collect::<Vec<_>>() }),
            );
            if worst > band {
                return Err(CliError::Tolerance(format!("Monte Carlo deviates by {worst:.2} standard errors")));
            }
        }
        EsigCmd::Bound { law, big_k, cutoff, max_len } => {
            let (cov, t) = (parse_matrix(&law.cov)?, parse_q(&law.t)?);
            let basis = GeneratorBasis::shared(2, cov.len() as u32)?;
            let rows = moment_bound_check(&cov, &t, big_k, cutoff, max_len, &basis)?;
            out.emit(
                || {
                    let mut s = format!("{:>6}  {:>14}  {:>14}  {:>8}\n", "length", "contribution", "partial sum", "ratio");
                    for r in &rows {
                        let ratio = r.ratio.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
                        s += &format!("{:>6}  {:>14.6}  {:>14.6}  {:>8}\n", r.length, r.contribution, r.partial_sum, ratio);
                    }
                    s.trim_end().to_string()
                },
                || json!(rows),
            );
        }
        EsigCmd::Sample { law, level, samples, steps, seed, out: file } => {
            let (cov, t) = (parse_matrix(&law.cov)?, parse_q(&law.t)?);
            let sigs = bm_signature_samples(&to_f64_matrix(&cov), Scalar::to_f64(&t), level, samples, steps, seed)?;
            let exact: Vec<ForestSeries<Q>> = sigs.iter().map(ForestSeries::from_f64_exact).collect::<branched_core::Result<_>>()?;
            let artifact = SigsJson::from_series(level, &exact);
            write_artifact(file.as_deref(), &artifact)?;
            if let Some(p) = &file {
                out.emit(
                    || format!("{samples} signatures at level {level} written to {}", p.display()),
                    || json!({ "samples": samples, "level": level, "out": p }),
                );
            }
        }
    }
    Ok(())
}

pub struct EsigRow {
    forest: String,
    mean: f64,
    stderr: f64,
    exact: f64,
    z: f64,
}

impl EsigRow {
    pub fn new(forest: String, mean: f64, stderr: f64, exact: f64) -> Self {
        let diff = (mean - exact).abs();
        let z = if stderr > 0.0 {
            diff / stderr
        } else if diff > 1e-12 {
            f64::INFINITY
        } else {
            0.0
        };
        EsigRow { forest, mean, stderr, exact, z }
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "forest": self.forest, "mc_mean": self.mean, "stderr": self.stderr, "closed_form": self.exact, "z": self.z })
    }
}

pub fn esig_table(rows: &[EsigRow]) -> String {
    let mut s = format!("{:<14} {:>12} {:>10} {:>12} {:>7}\n", "forest", "MC mean", "std err", "closed form", "z");
    for r in rows {
        s += &format!("{:<14} {:>12.6} {:>10.6} {:>12.6} {:>7.2}\n", r.forest, r.mean, r.stderr, r.exact, r.z);
    }
    s.trim_end().to_string()
}

pub fn rde(out: &Out, cmd: RdeCmd) -> CliResult {
    let RdeCmd::Compare { driver, fields, p, y0, bits } = cmd;
    let rp = lift_from_path(&PathLiftArgs { path: driver, p, bits })?;
    let fields = read_json::<FieldsJson>(&fields)?.to_fields()?;
    if fields.driver_dim() < rp.dim() as usize {
        return Err(CliError::Core(branched_core::Error::Invariant(format!(
            "driver has {} components but only {} vector fields are given",
            rp.dim(),
            fields.driver_dim()
        ))));
    }
    let y0 = parse_vector(&y0)?;
    let basis = GeneratorBasis::shared(rp.level(), rp.dim())?;
    let branched = branched_euler_solve(&rp, &fields, &y0)?;
    let steps = psi_driver(&rp, &basis)?;
    let fbar = generator_fields(&basis, steps[0].scaling().k(), &fields)?;
    let geometric = geometric_euler_solve(&steps, &fbar, &y0)?;
    let identical = branched == geometric;
    let fmt = |y: &[Q]| y.iter().map(format_q).collect::<Vec<_>>();
    let (yb, yg) = (fmt(branched.last().expect("non-empty")), fmt(geometric.last().expect("non-empty")));
    let approx = |y: &[Q]| y.iter().map(Scalar::to_f64).collect::<Vec<_>>();
    out.emit(
        || {
            format!(
                "{} steps\nbranched Euler:  {:?}\ngeometric Euler: {:?}\nidentical at every step: {identical}",
                rp.steps(),
                approx(branched.last().expect("non-empty")),
                approx(geometric.last().expect("non-empty"))
            )
        },
        || json!({ "steps": rp.steps(), "branched": yb, "geometric": yg, "identical": identical }),
    );
    if !identical {
        return Err(CliError::Tolerance("branched and geometric solutions differ".into()));
    }
    Ok(())
}

/// Samples are evaluated in float arithmetic: sampled signatures are only
/// group-like up to roundoff.
fn load_sigs(path: &Path) -> Result<(usize, Vec<ForestSeries<f64>>), CliError> {
    let j: SigsJson = read_json(path)?;
    let sigs: Vec<ForestSeries<f64>> = j.to_series()?.iter().map(ForestSeries::to_f64).collect();
    if sigs.is_empty() {
        return Err(CliError::Core(branched_core::Error::Invariant(format!("{}: empty sample", path.display()))));
    }
    Ok((j.level, sigs))
}

fn load_rep(path: &Path) -> Result<Representation, CliError> {
    Ok(read_json::<RepJson>(path)?.to_representation()?)
}

fn sample_basis(level: usize, sigs: &[&[ForestSeries<f64>]]) -> Result<std::sync::Arc<GeneratorBasis>, CliError> {
    let d = sigs.iter().flat_map(|s| s.iter()).map(|g| g.max_label()).max().unwrap_or(1).max(1);
    Ok(GeneratorBasis::shared(level.max(1), d)?)
}

pub fn fourier(out: &Out, cmd: FourierCmd) -> CliResult {
    match cmd {
        FourierCmd::Eval { rep, sigs } => {
            let rep = load_rep(&rep)?;
            let (level, sigs) = load_sigs(&sigs)?;
            let basis = sample_basis(level, &[&sigs])?;
            let est = char_function(&sigs, &rep, &basis)?;
            let n = rep.dim();
            let entries: Vec<serde_json::Value> = (0..n)
                .flat_map(|r| (0..n).map(move |c| (r, c)))
                .map(|(r, c)| json!({ "row": r, "col": c, "re": est.mean[(r, c)].re, "im": est.mean[(r, c)].im, "stderr": est.stderr[(r, c)] }))
                .collect();
            out.emit(
                || {
                    let mut s = format!("E[U(X)] over {} samples\n", est.samples);
                    for r in 0..n {
                        for c in 0..n {
                            let z = est.mean[(r, c)];
                            s += &format!("[{r},{c}] {:+.6} {:+.6}i  ± {:.6}\n", z.re, z.im, est.stderr[(r, c)]);
                        }
                    }
                    s.trim_end().to_string()
                },
                || json!({ "samples": est.samples, "dim": n, "entries": entries }),
            );
        }
        FourierCmd::Compare { rep, sigs, other, band } => {
            let reps = rep.iter().map(|p| load_rep(p)).collect::<Result<Vec<_>, _>>()?;
            let (la, a) = load_sigs(&sigs)?;
            let (lb, b) = load_sigs(&other)?;
            let basis = sample_basis(la.max(lb), &[&a, &b])?;
            let report = distinguish(&a, &b, &reps, band, &basis)?;
            out.emit(
                || {
                    let mut s = String::new();
                    for r in &report.per_representation {
                        s += &format!("representation {}: max |Δ| = {:.6}, max z = {:.2}\n", r.representation, r.max_abs_difference, r.max_z);
                    }
                    s + &format!("distinguished at {band} standard errors: {}", report.distinguished)
                },
                || json!(report),
            );
        }
        FourierCmd::Random { dim, generators, scale, seed, out: file } => {
            let gens: Vec<u32> = generators
                .split(',')
                .map(|g| g.trim().parse().map_err(|_| CliError::Usage(format!("bad generator index {g:?}"))))
                .collect::<Result<_, _>>()?;
            let rep = Representation::random(dim, &gens, scale, seed)?;
            write_artifact(file.as_deref(), &rep.to_json())?;
        }
    }
    Ok(())
}
