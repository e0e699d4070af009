use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use treeformat::approx::{monotonicity_violations, rank_map};
use treeformat::io::{self, Document};
use treeformat::linalg::{gaussian_vec, seeded_rng};
use treeformat::minsub::proper_subsets;
use treeformat::{
    best_approx, hsvd_detailed, injective_norm, minimal_subspace, random_tree_tensor, span_from_contractions,
    tree_rank, truncate, verify_nestedness, verify_rank_duality, AlsOptions, DenseTensor, DimensionTree, Error,
    RankTol, RankTuple, Record, Report, Sampling, TreeTensor, Truncation,
};

use crate::{
    ApproxArgs, Cli, Command, CompressArgs, Failure, GenArgs, InfoArgs, NormArgs, RankArgs, ReconstructArgs, SeedArg,
    Suite, TruncateArgs, VerifyArgs,
};

type Scalar = f64;

pub struct Outcome {
    pub code: u8,
    pub summary: Option<Value>,
    /// The summary is the command's result and ignores `--quiet`.
    pub always_print: bool,
}

impl Outcome {
    fn summary(v: Value) -> Self {
        Outcome {
            code: 0,
            summary: Some(v),
            always_print: false,
        }
    }

    fn result(v: Value) -> Self {
        Outcome {
            code: 0,
            summary: Some(v),
            always_print: true,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Compress(a) => compress(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Rank(a) => rank(a),
        Command::Truncate(a) => truncate_cmd(a),
        Command::Approx(a) => approx(a),
        Command::Norm(a) => norm(a),
        Command::Verify(a) => verify(a),
        Command::Info(a) => info(a),
    }
}

fn seed_of(arg: &SeedArg) -> Result<u64, Failure> {
    if let Some(s) = arg.seed {
        return Ok(s);
    }
    match std::env::var("TT_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::input("InvalidArgument", format!("TT_SEED={s:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input("IoError", format!("{}: {e}", path.display())))
}

/// Writes to a temporary file next to `path`, then renames it into place.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let io_err = |e: std::io::Error| Failure::input("IoError", format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn read_dense(path: &Path) -> Result<DenseTensor<Scalar>, Failure> {
    Ok(io::parse_dense(&read_text(path)?)?)
}

fn parse_tree(spec: &str, d: usize) -> Result<DimensionTree, Failure> {
    Ok(match spec.trim() {
        "tucker" => DimensionTree::tucker(d)?,
        "linear" => DimensionTree::linear(d)?,
        "balanced" => DimensionTree::balanced(d)?,
        s => DimensionTree::build(d, s)?,
    })
}

fn warn(warnings: &[String]) {
    for w in warnings {
        let kind = w.split(':').next().unwrap_or("warning");
        eprintln!("{}", json!({ "warning": kind, "message": w }));
    }
}

fn storage_json<T: treeformat::Real>(t: &TreeTensor<T>) -> Value {
    serde_json::to_value(t.storage_report()).expect("storage report serializes")
}

fn gen(a: &GenArgs) -> Result<Outcome, Failure> {
    let seed = seed_of(&a.seed)?;
    let d = a.shape.len();
    if d < 2 {
        return Err(Error::InvalidModeCount(d).into());
    }
    if a.shape.contains(&0) {
        return Err(Failure::input("ShapeMismatch", "mode sizes must be positive"));
    }
    let mut rng = seeded_rng(seed);
    let (kind, text) = if let Some(spec) = &a.ranks {
        let tree = parse_tree(a.tree.as_deref().unwrap_or("balanced"), d)?;
        let ranks = RankTuple::parse_spec(&tree, spec)?;
        let t: TreeTensor<Scalar> = random_tree_tensor(&tree, &a.shape, &ranks, seed)?;
        ("tree_tensor", io::to_string(&io::tree_tensor_to_json(&t)))
    } else {
        let terms = if a.elementary { Some(1) } else { a.sum };
        let v = match terms {
            Some(0) => return Err(Failure::input("InvalidArgument", "--sum needs at least one term")),
            Some(k) => {
                let mut acc = DenseTensor::zeros(a.shape.clone());
                for _ in 0..k {
                    let f: Vec<Vec<Scalar>> = a.shape.iter().map(|&n| gaussian_vec(&mut rng, n)).collect();
                    acc = acc.add(&DenseTensor::elementary(&f)?)?;
                }
                acc
            }
            None => {
                let n = a.shape.iter().product();
                DenseTensor::new(a.shape.clone(), gaussian_vec(&mut rng, n))?
            }
        };
        ("dense", io::to_string(&io::dense_to_json(&v)))
    };
    write_atomic(&a.out, &text)?;
    Ok(Outcome::summary(json!({
        "kind": kind,
        "out": a.out.display().to_string(),
        "seed": seed,
        "shape": a.shape,
    })))
}

fn compress(a: &CompressArgs) -> Result<Outcome, Failure> {
    let v = read_dense(&a.input)?;
    let tree = parse_tree(&a.tree, v.ndim())?;
    let caps = a.ranks.as_deref().map(|s| RankTuple::parse_spec(&tree, s)).transpose()?;
    let control = Truncation {
        rel_tol: a.tol.unwrap_or(0.0),
        caps,
    };
    let out = hsvd_detailed(&v, &tree, &control)?;
    warn(&out.warnings);
    let t = out.tensor;
    write_atomic(&a.out, &io::to_string(&io::tree_tensor_to_json(&t)))?;
    let err = t.evaluate().relative_error(&v)?;
    Ok(Outcome::summary(json!({
        "out": a.out.display().to_string(),
        "ranks": rank_map(t.ranks()),
        "relative_error": err,
        "storage": storage_json(&t),
    })))
}

fn reconstruct(a: &ReconstructArgs) -> Result<Outcome, Failure> {
    let t: TreeTensor<Scalar> = io::parse_tree_tensor(&read_text(&a.input)?)?;
    let v = t.evaluate();
    write_atomic(&a.out, &io::to_string(&io::dense_to_json(&v)))?;
    Ok(Outcome::summary(json!({
        "out": a.out.display().to_string(),
        "shape": v.shape(),
    })))
}

fn rank_tol(rtol: Option<f64>) -> Result<RankTol<Scalar>, Failure> {
    match rtol {
        None => Ok(RankTol::default()),
        Some(r) if r.is_finite() && r >= 0.0 => Ok(RankTol::relative(r)),
        Some(r) => Err(Failure::input("InvalidArgument", format!("rtol {r} must be finite and non-negative"))),
    }
}

fn rank(a: &RankArgs) -> Result<Outcome, Failure> {
    let v = read_dense(&a.input)?;
    let tree = parse_tree(&a.tree, v.ndim())?;
    let tol = rank_tol(a.rtol)?;
    let r = tree_rank(&v, &tree, &tol)?;
    let mut doc = io::ranks_to_json(&r);
    if a.all_subsets {
        let d = v.ndim();
        if d > treeformat::minsub::ALL_SUBSETS_MAX_D {
            return Err(Failure::input(
                "InvalidArgument",
                format!("--all-subsets needs d <= {}", treeformat::minsub::ALL_SUBSETS_MAX_D),
            ));
        }
        let mut subsets = Map::new();
        for s in proper_subsets(d) {
            subsets.insert(s.key(), Value::from(treeformat::minsub::matricization_rank(&v, &s, &tol)?));
        }
        doc["subsets"] = Value::Object(subsets);
    }
    match &a.out {
        Some(path) => {
            write_atomic(path, &io::to_string(&doc))?;
            Ok(Outcome::summary(json!({ "out": path.display().to_string() })))
        }
        None => Ok(Outcome::result(doc)),
    }
}

fn truncate_cmd(a: &TruncateArgs) -> Result<Outcome, Failure> {
    let v = read_dense(&a.input)?;
    let tree = parse_tree(&a.tree, v.ndim())?;
    let caps = RankTuple::parse_spec(&tree, &a.ranks)?;
    let r = truncate(&v, &tree, &caps)?;
    warn(&r.warnings);
    write_atomic(&a.out, &io::to_string(&io::tree_tensor_to_json(&r.approximant)))?;
    Ok(Outcome::summary(json!({
        "discarded_bound": r.discarded_bound(),
        "out": a.out.display().to_string(),
        "ranks": rank_map(r.approximant.ranks()),
        "residual": r.residual,
    })))
}

fn approx(a: &ApproxArgs) -> Result<Outcome, Failure> {
    let seed = seed_of(&a.seed)?;
    let v = read_dense(&a.input)?;
    let tree = parse_tree(&a.tree, v.ndim())?;
    let caps = RankTuple::parse_spec(&tree, &a.ranks)?;
    let opts = AlsOptions {
        max_iters: a.max_iters,
        ..AlsOptions::default()
    };
    let r = best_approx(&v, &tree, &caps, a.restarts, seed, &opts)?;
    warn(&r.warnings);
    write_atomic(&a.out, &io::to_string(&io::tree_tensor_to_json(&r.approximant)))?;
    let truncation_residual = r.histories.first().and_then(|h| h.first()).copied();
    let non_monotone: usize = r.histories.iter().map(|h| monotonicity_violations(h)).sum();
    Ok(Outcome::summary(json!({
        "iterations": r.iterations,
        "non_monotone_sweeps": non_monotone,
        "out": a.out.display().to_string(),
        "ranks": rank_map(r.approximant.ranks()),
        "residual": r.residual,
        "restarts_used": r.restarts_used,
        "seed": seed,
        "truncation_residual": truncation_residual,
    })))
}

fn norm(a: &NormArgs) -> Result<Outcome, Failure> {
    let seed = seed_of(&a.seed)?;
    let v = read_dense(&a.input)?;
    let n = injective_norm(&v, a.restarts, a.iters, seed)?;
    Ok(Outcome::result(json!({
        "estimate": n.estimate,
        "frobenius": v.frobenius_norm(),
        "restart": n.restart,
        "seed": seed,
        "witness": n.witness,
    })))
}

/// Relative residual allowed by the nestedness and round-trip suites.
const SUITE_TOL: f64 = 1e-10;
/// Projector distance allowed by the spans suite.
const SPAN_TOL: f64 = 1e-8;

fn spans_report(v: &DenseTensor<Scalar>, tree: &DimensionTree, seed: u64) -> Result<Report, Failure> {
    let tol = RankTol::default();
    let mut report = Report::new("spans");
    let mut k = 0u64;
    for alpha in tree.ids().filter(|&i| !tree.is_leaf(i)) {
        for &beta in tree.sons(alpha) {
            let r = minimal_subspace(v, tree.vertex(beta), &tol)?.dim();
            let rec = span_from_contractions(
                v,
                tree.vertex(beta),
                tree.vertex(alpha),
                r + 2,
                seed.wrapping_add(k),
                Sampling::Independent,
                &tol,
                SPAN_TOL,
            )?;
            report.push(rec);
            k += 1;
        }
    }
    Ok(report)
}

fn roundtrip_report(v: &DenseTensor<Scalar>, tree: &DimensionTree) -> Result<Report, Failure> {
    let t = hsvd_detailed(v, tree, &Truncation::exact())?.tensor;
    let err = t.evaluate().relative_error(v)?;
    let minimal = t.flags().minimal;
    let mut report = Report::new("roundtrip");
    report.push(
        Record::new(tree.vertex(tree.root()).key(), err, SUITE_TOL, err <= SUITE_TOL && minimal)
            .with("minimal", minimal)
            .with("ranks", rank_map(t.ranks())),
    );
    Ok(report)
}

fn verify(a: &VerifyArgs) -> Result<Outcome, Failure> {
    let seed = seed_of(&a.seed)?;
    let v = read_dense(&a.input)?;
    let tree = parse_tree(&a.tree, v.ndim())?;
    let tol = RankTol::default();
    let wanted = |s: Suite| a.suite == Suite::All || a.suite == s;
    let mut reports = Vec::new();
    if wanted(Suite::Duality) {
        let all = v.ndim() <= treeformat::minsub::ALL_SUBSETS_MAX_D;
        reports.push(verify_rank_duality(&v, &tree, all, &tol)?);
    }
    if wanted(Suite::Nestedness) {
        reports.push(verify_nestedness(&v, &tree, &tol, SUITE_TOL)?);
    }
    if wanted(Suite::Spans) {
        reports.push(spans_report(&v, &tree, seed)?);
    }
    if wanted(Suite::Roundtrip) {
        reports.push(roundtrip_report(&v, &tree)?);
    }
    let pass = reports.iter().all(Report::passed);
    let suites: Map<String, Value> = reports
        .iter()
        .map(|r| {
            (
                r.check.clone(),
                json!({ "pass": r.passed(), "records": serde_json::to_value(&r.records).expect("records serialize") }),
            )
        })
        .collect();
    Ok(Outcome {
        code: if pass { 0 } else { 1 },
        summary: Some(json!({ "pass": pass, "seed": seed, "suites": suites })),
        always_print: true,
    })
}

fn as_dense(doc: Document<Scalar>, path: &Path) -> Result<DenseTensor<Scalar>, Failure> {
    match doc {
        Document::Dense(v) => Ok(v),
        Document::Tree(t) => Ok(t.evaluate()),
        Document::Ranks(_) => Err(Failure::input(
            "InvalidArgument",
            format!("{} holds a rank tuple, not a tensor", path.display()),
        )),
    }
}

fn info(a: &InfoArgs) -> Result<Outcome, Failure> {
    let doc: Document<Scalar> = io::parse_document(&read_text(&a.input)?)?;
    let mut out = match &doc {
        Document::Dense(v) => json!({
            "frobenius_norm": v.frobenius_norm(),
            "shape": v.shape(),
        }),
        Document::Ranks(r) => json!({
            "ranks": rank_map(r),
            "tree": r.tree().to_string(),
        }),
        Document::Tree(t) => json!({
            "flags": serde_json::to_value(t.flags()).expect("flags serialize"),
            "ranks": rank_map(t.ranks()),
            "shape": t.shape(),
            "storage": storage_json(t),
            "tree": t.tree().to_string(),
        }),
    };
    out["kind"] = Value::from(doc.kind());
    if let Some(other) = &a.compare {
        let reference: Document<Scalar> = io::parse_document(&read_text(other)?)?;
        let reference = as_dense(reference, other)?;
        let mine = as_dense(doc, &a.input)?;
        out["relative_error"] = Value::from(mine.relative_error(&reference)?);
    }
    Ok(Outcome::result(out))
}
