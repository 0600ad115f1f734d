use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use entropylab::binary_shift::equivalence_from_rows;
use entropylab::{
    coarsen_transfer_report, entropy_rate, independence_check, markov_defect_sequence,
    nested_defect_check, refine_transfer_report, structure_sequence, typical_mass_exact,
    typical_mass_mc, Budget, CommutationSet, CommutingPairModel, MarkovSource, MultiMatrix,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{emit, with_suffix, Cell, Format, Report, Table};
use crate::{
    AlgebraArgs, BinshiftArgs, DefectArgs, Kind, Lemma32Args, OutArgs, SmbArgs, SourceArgs,
    TransferArgs,
};

/// Largest residual `lemma32` accepts.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Budget(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Budget(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<entropylab::Error> for CliError {
    fn from(e: entropylab::Error) -> Self {
        match e {
            entropylab::Error::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Config(msg.into()))
}

/// A computed report, where it goes, and any property violation it exposed.
pub struct Outcome {
    report: Report,
    targets: Vec<(Format, Option<PathBuf>)>,
    violation: Option<String>,
}

impl Outcome {
    fn single(report: Report, out: &OutArgs, default: Format) -> Self {
        Outcome {
            report,
            targets: vec![(out.format.unwrap_or(default), out.out.clone())],
            violation: None,
        }
    }

    fn violation(mut self, v: Option<String>) -> Self {
        self.violation = v;
        self
    }

    pub fn write(self) -> Result<Option<String>> {
        for (format, path) in &self.targets {
            emit(&self.report.render(*format), path.as_deref())
                .map_err(|e| CliError::Io(format!("writing report: {e}")))?;
        }
        Ok(self.violation)
    }
}

/// Parses `20`, `1..16` and `1..=16` (both inclusive) or `10,20,40`.
pub fn parse_n_spec(spec: &str) -> Result<Vec<usize>> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("invalid length {s:?} in n spec {spec:?}")))
    };
    let ns = if let Some((a, b)) = spec.split_once("..") {
        let (lo, hi) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
        if lo > hi {
            return config_err(format!("empty n range {spec:?}"));
        }
        (lo..=hi).collect()
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if ns.is_empty() || ns.contains(&0) {
        return config_err(format!("n spec {spec:?} must list positive lengths"));
    }
    Ok(ns)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::Config(format!("invalid {what} entry {t:?}")))
        })
        .collect()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn load_source(args: &SourceArgs) -> Result<(MarkovSource, Value)> {
    match (args.bernoulli, &args.markov) {
        (Some(q), None) => Ok((MarkovSource::bernoulli(q)?, json!({ "bernoulli": q }))),
        (None, Some(path)) => {
            let src: MarkovSource = read_json(path)?;
            let desc = json!({ "markov": path.display().to_string(), "P": src.transition(), "labels": src.labels() });
            Ok((src, desc))
        }
        _ => config_err("exactly one of --bernoulli or --markov is required"),
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        config_err(format!("eps must be positive, got {eps}"))
    }
}

/// Runs `f` over `ns` in parallel, keeping input order and reporting the
/// error of the smallest failing index.
fn per_n<T: Send>(ns: &[usize], f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = ns.par_iter().map(|&n| f(n)).collect();
    results.into_iter().collect()
}

pub fn smb(a: &SmbArgs, budget: Budget) -> Result<Outcome> {
    let (src, source) = load_source(&a.source)?;
    let ns = parse_n_spec(&a.n)?;
    check_eps(a.eps)?;
    if a.mc && a.samples == 0 {
        return config_err("--samples must be positive");
    }
    let h = entropy_rate(&src);
    let method = if a.mc { "mc" } else { "exact" };
    let mut config = json!({
        "command": "smb", "source": source, "n": ns, "eps": a.eps, "method": method,
    });
    if a.mc {
        config["samples"] = json!(a.samples);
        config["seed"] = json!(a.seed);
    } else {
        config["budget"] = json!(budget.0);
    }

    let masses = per_n(&ns, |n| {
        if a.mc {
            let est = typical_mass_mc(&src, n, h, a.eps, a.samples, a.seed)?;
            Ok((est.estimate, Some(est.ci_halfwidth), Some(est.hits)))
        } else {
            Ok((typical_mass_exact(&src, n, h, a.eps, budget)?, None, None))
        }
    })?;

    let mut table = Table::new(vec![
        "n",
        "mass",
        "ci_halfwidth",
        "hits",
        "entropy_rate",
        "rate_lo",
        "rate_hi",
        "log_mu_lo",
        "log_mu_hi",
    ]);
    let mut rows = Vec::new();
    for (&n, &(mass, ci, hits)) in ns.iter().zip(&masses) {
        let nf = n as f64;
        let (lo, hi) = (h - a.eps, h + a.eps);
        table.push(vec![
            n.into(),
            mass.into(),
            ci.into(),
            hits.into(),
            h.into(),
            lo.into(),
            hi.into(),
            (-nf * hi).into(),
            (-nf * lo).into(),
        ]);
        rows.push(json!({
            "n": n, "mass": mass, "ci_halfwidth": ci, "hits": hits, "entropy_rate": h,
            "rate_lo": lo, "rate_hi": hi, "log_mu_lo": -nf * hi, "log_mu_hi": -nf * lo,
        }));
    }
    let report = Report {
        config,
        body: json!({ "rows": rows }),
        table,
    };
    Ok(Outcome::single(report, &a.out, Format::Json))
}

fn commutation_set(a: &BinshiftArgs) -> Result<(CommutationSet, Value)> {
    if let Some(path) = &a.x_json {
        let x: CommutationSet = read_json(path)?;
        let desc = json!({ "x_json": path.display().to_string(), "x": x });
        return Ok((x, desc));
    }
    let mut x = CommutationSet::parse_list(a.x.as_deref().unwrap_or(""))?;
    if let (Some(period), Some(res)) = (a.period, &a.residues) {
        x = x.with_period(period, parse_list(res, "residue")?)?;
    }
    let desc = json!({ "x": x });
    Ok((x, desc))
}

pub fn binshift(a: &BinshiftArgs) -> Result<Outcome> {
    let (x, desc) = commutation_set(a)?;
    if a.nmax == 0 {
        return config_err("--nmax must be positive");
    }
    check_eps(a.eps)?;
    let rows = structure_sequence(&x, a.nmax)?;
    let report = equivalence_from_rows(&rows, a.eps, x.is_empty());

    let mut config = json!({ "command": "binshift", "nmax": a.nmax, "eps": a.eps });
    config
        .as_object_mut()
        .unwrap()
        .extend(desc.as_object().unwrap().clone());
    let mut table = Table::new(vec![
        "n",
        "d_n",
        "c_n",
        "atom_trace_log2",
        "mean_entropy_nats",
    ]);
    for r in &rows {
        table.push(vec![
            r.n.into(),
            r.d_n.into(),
            r.c_n.into(),
            Cell::Text(r.atom_trace_log2().to_string()),
            r.mean_entropy().into(),
        ]);
    }
    let violation = (!report.consistent)
        .then(|| "limit estimate is within eps of ln(2)/2 but the band never settles".to_string());
    let body = json!({ "report": report, "rows": rows });
    let targets = match &a.out {
        Some(prefix) => vec![
            (Format::Csv, Some(with_suffix(prefix, "csv"))),
            (Format::Json, Some(with_suffix(prefix, "json"))),
        ],
        None => vec![(a.format, None)],
    };
    Ok(Outcome {
        report: Report {
            config,
            body,
            table,
        },
        targets,
        violation,
    })
}

pub fn lemma32(a: &Lemma32Args) -> Result<Outcome> {
    if a.trials == 0 {
        return config_err("--trials must be at least 1");
    }
    let results: Vec<_> = (0..a.trials)
        .into_par_iter()
        .map(|t| {
            let model = CommutingPairModel::seeded_trial(a.seed, t);
            (
                model.left_atoms().len(),
                model.right_atoms().len(),
                model.pair_entropies(),
            )
        })
        .collect();

    let mut table = Table::new(vec![
        "trial",
        "rows",
        "cols",
        "h_join_full",
        "h_join_abelian",
        "defect_left",
        "defect_right",
        "residual",
    ]);
    let mut max_residual: f64 = 0.0;
    let mut worst_trial = 0u64;
    for (t, (rows, cols, e)) in results.iter().enumerate() {
        let r = e.residual().abs();
        if r > max_residual {
            max_residual = r;
            worst_trial = t as u64;
        }
        table.push(vec![
            t.into(),
            (*rows).into(),
            (*cols).into(),
            e.h_join_full.into(),
            e.h_join_abelian.into(),
            e.defect_left.into(),
            e.defect_right.into(),
            e.residual().into(),
        ]);
    }
    let pass = max_residual < RESIDUAL_TOL;
    let config = json!({ "command": "lemma32", "trials": a.trials, "seed": a.seed, "tolerance": RESIDUAL_TOL });
    let body = json!({
        "summary": { "max_residual": max_residual, "worst_trial": worst_trial, "pass": pass },
    });
    let violation = (!pass).then(|| {
        format!("residual {max_residual:e} at trial {worst_trial} exceeds {RESIDUAL_TOL:e}")
    });
    Ok(Outcome::single(
        Report {
            config,
            body,
            table,
        },
        &a.out,
        Format::Json,
    )
    .violation(violation))
}

pub fn algebra(a: &AlgebraArgs) -> Result<Outcome> {
    let alg: MultiMatrix = read_json(&a.input)?;
    let mut config = json!({ "command": "algebra", "input": a.input.display().to_string() });
    let mut table = Table::new(vec![
        "n",
        "h",
        "eps",
        "z_mass",
        "in_band_mass",
        "out_summands",
    ]);
    let mut bands = Vec::new();
    if let (Some(spec), Some(h), Some(eps)) = (&a.n, a.h, a.eps) {
        let ns = parse_n_spec(spec)?;
        for &n in &ns {
            let b = alg.band_report(n as u64, h, eps)?;
            table.push(vec![
                n.into(),
                h.into(),
                eps.into(),
                b.z_mass.into(),
                b.in_band_mass.into(),
                b.out_summands.len().into(),
            ]);
            bands.push(b);
        }
        config["n"] = json!(ns);
        config["h"] = json!(h);
        config["eps"] = json!(eps);
    }
    let body = json!({
        "entropy": alg.entropy(),
        "rank_total": alg.rank_total().to_string(),
        "summands": alg.summands(),
        "bands": bands,
    });
    Ok(Outcome::single(
        Report {
            config,
            body,
            table,
        },
        &a.out,
        Format::Json,
    ))
}

pub fn transfer(a: &TransferArgs, budget: Budget) -> Result<Outcome> {
    let (src, source) = load_source(&a.source)?;
    let ns = parse_n_spec(&a.n)?;
    check_eps(a.eps)?;
    let reports = per_n(&ns, |n| {
        Ok(match a.kind {
            Kind::Refine => refine_transfer_report(&src, n, a.param, a.eps, budget)?,
            Kind::Coarsen => coarsen_transfer_report(&src, n, a.param, a.eps, budget)?,
        })
    })?;
    let mut table = Table::new(vec![
        "n",
        "h",
        "eps1",
        "h1",
        "hypothesis_mass",
        "hypothesis_holds",
        "not_x_prime_mass",
        "not_x_double_prime_mass",
        "z_mass",
        "tilde_x_mass",
        "tilde_x_in_band",
        "bound",
        "verdict",
    ]);
    for r in &reports {
        table.push(vec![
            r.n.into(),
            r.h.into(),
            r.eps1.into(),
            r.h1.into(),
            r.hypothesis_mass.into(),
            r.hypothesis_holds.into(),
            r.not_x_prime_mass.into(),
            r.not_x_double_prime_mass.into(),
            r.z_mass.into(),
            r.tilde_x_mass.into(),
            r.tilde_x_in_band.into(),
            r.bound.into(),
            r.verdict.into(),
        ]);
    }
    let broken: Vec<usize> = reports
        .iter()
        .filter(|r| r.hypothesis_holds && !r.verdict)
        .map(|r| r.n)
        .collect();
    let violation = (!broken.is_empty())
        .then(|| format!("hypothesis holds but conclusion fails at n = {broken:?}"));
    let config = json!({
        "command": "transfer", "source": source, "kind": a.kind, "n": ns,
        "param": a.param, "eps": a.eps, "budget": budget.0,
    });
    let body = json!({ "rows": reports });
    Ok(Outcome::single(
        Report {
            config,
            body,
            table,
        },
        &a.out,
        Format::Json,
    )
    .violation(violation))
}

pub fn defect(a: &DefectArgs, budget: Budget) -> Result<Outcome> {
    let (src, source) = load_source(&a.source)?;
    let ns = parse_n_spec(&a.n)?;
    let seq = markov_defect_sequence(&src, a.p, &ns)?;
    let mut config = json!({
        "command": "defect", "source": source, "p": a.p, "n": ns, "budget": budget.0,
    });
    let mut body = json!({ "defect": seq });
    let mut violations = Vec::new();

    let nested = match &a.coarse_map {
        Some(spec) => {
            let map: Vec<usize> = parse_list(spec, "coarse map")?;
            let rep = nested_defect_check(&src, &map, a.p, &ns, budget)?;
            if !rep.holds {
                violations.push("nested defect inequality fails".to_string());
            }
            config["coarse_map"] = json!(map);
            body["nested"] = json!(rep);
            Some(rep)
        }
        None => None,
    };
    if a.independence {
        let rep = independence_check(&src, a.p, a.n_probe, budget)?;
        let zero_defect = seq
            .rows
            .iter()
            .all(|r| (r.h_static - r.h_dynamic).abs() < entropylab::mean_generator::DEFECT_TOL);
        if rep.independent && !zero_defect {
            violations.push("blocks are independent but the defect is nonzero".to_string());
        }
        config["n_probe"] = json!(a.n_probe);
        body["independence"] = json!(rep);
    }

    let mut table = Table::new(vec![
        "n",
        "h_static",
        "h_dynamic",
        "defect",
        "defect_over_n",
        "coarse_defect",
        "fine_defect",
        "nested_holds",
    ]);
    for (i, r) in seq.rows.iter().enumerate() {
        let nr = nested.as_ref().map(|rep| rep.rows[i]);
        table.push(vec![
            r.n.into(),
            r.h_static.into(),
            r.h_dynamic.into(),
            (r.h_static - r.h_dynamic).into(),
            r.defect_over_n.into(),
            nr.map(|x| x.coarse_defect).into(),
            nr.map(|x| x.fine_defect).into(),
            nr.map(|x| x.holds).into(),
        ]);
    }
    let violation = (!violations.is_empty()).then(|| violations.join("; "));
    Ok(Outcome::single(
        Report {
            config,
            body,
            table,
        },
        &a.out,
        Format::Json,
    )
    .violation(violation))
}
