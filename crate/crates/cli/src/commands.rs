use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use lpspace::blockbasis::{
    block_isometry_check, build_blocks, dual_sup_unit_ball, greedy_partition, lpn_block_design, lpn_isometry_check,
    project, projection_coefficients, projection_contraction_check, BlockPartition, DualMode, DualSupOptions,
};
use lpspace::optim::{AscentConfig, RatioConfig, DEFAULT_SEED};
use lpspace::randvar::{
    exact_pnorm_of_sum, kahane_vector_check, khintchine_check, lemma24_check, make_three_valued, mc_pnorm_of_sum,
    rosenthal_check, sample_stable, Evaluation, RVFamily,
};
use lpspace::seqspace::{
    bp_norm, canonical_weights, classify_weights, conjugate_index, ell2w_inner, mixed_p2w_norm, tensor_norm, xpw_norm,
    BpBlock, CanonicalCase, CoefficientTensor, WeightSequence,
};
use lpspace::stepfn::{
    branch_project, cond_expect, disjoint_sum, dyadic_level, haar_decompose, lift, s_projection, squeeze,
    CoordinateSpace, DesignatedSpan, StepFunction,
};
use lpspace::suite::{run_acceptance, run_criterion};
use lpspace::treeindex::{
    branch, build_t_alpha, concat, delta_membership, disjoint_lift, dotprec, dotpreceq, embed_cfre, h_index, lambda_of,
    left_set, level_prec, level_set, relation_map_check, right_set, tree_rank, tree_upto, CfreTree, DyadicString,
    FiniteRelation, LevelVector, OrdinalCNF, Truncation,
};

use crate::{
    BlocksOp, ClassifyOp, CliError, Command, KhintchineOp, NormOp, Opts, RosenthalOp, StepOp, SuiteOp, TreeOp,
};

type Res<T> = Result<T, CliError>;

pub struct Outcome {
    pub doc: Value,
    pub code: u8,
}

fn ok(doc: impl Serialize) -> Res<Outcome> {
    Ok(Outcome { doc: serde_json::to_value(doc).map_err(|e| CliError::Input(e.to_string()))?, code: 0 })
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Res<T> {
    v.clone().ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

fn read<T: DeserializeOwned>(path: &Path) -> Res<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_flag<T: DeserializeOwned>(path: &Option<PathBuf>, flag: &str) -> Res<T> {
    read(&need(path, flag)?)
}

/// Coefficients may be given as a tensor document or a bare array.
#[derive(Deserialize)]
#[serde(untagged)]
enum Coeffs {
    Tensor(CoefficientTensor),
    Flat(Vec<f64>),
}

impl Coeffs {
    fn tensor(self) -> Res<CoefficientTensor> {
        match self {
            Coeffs::Tensor(t) => Ok(t),
            Coeffs::Flat(v) => Ok(CoefficientTensor::vector(v)?),
        }
    }

    fn flat(self) -> Res<Vec<f64>> {
        match self {
            Coeffs::Flat(v) => Ok(v),
            Coeffs::Tensor(t) if t.rank() == 1 => Ok(t.values().to_vec()),
            Coeffs::Tensor(t) => Err(CliError::Input(format!("expected a vector, got shape {:?}", t.shape()))),
        }
    }
}

fn coeffs(o: &Opts) -> Res<Vec<f64>> {
    read_flag::<Coeffs>(&o.coeffs, "coeffs")?.flat()
}

fn weights(o: &Opts) -> Res<WeightSequence> {
    read_flag(&o.weights, "weights")
}

fn usize_flag(v: Option<u64>, flag: &str) -> Res<usize> {
    let v = need(&v, flag)?;
    usize::try_from(v).map_err(|_| CliError::Usage(format!("--{flag} is too large")))
}

pub fn run(cmd: &Command, o: &Opts) -> Res<Outcome> {
    match cmd {
        Command::Norm { op } => norm(op, o),
        Command::Classify { op } => classify(op.as_ref().unwrap_or(&ClassifyOp::Weights), o),
        Command::Blocks { op } => blocks(op, o),
        Command::Dualsup => dualsup(o),
        Command::Rosenthal { op } => rosenthal(op.as_ref().unwrap_or(&RosenthalOp::Check), o),
        Command::Khintchine { op } => khintchine(op.as_ref().unwrap_or(&KhintchineOp::Check), o),
        Command::Stepfn { op } => stepfn(op, o),
        Command::Tree { op } => tree(op, o),
        Command::Suite { op } => suite(op, o),
    }
}

fn norm(op: &NormOp, o: &Opts) -> Res<Outcome> {
    match op {
        NormOp::Xpw => ok(xpw_norm(&weights(o)?, &read_flag::<Coeffs>(&o.coeffs, "coeffs")?.tensor()?)?),
        NormOp::Inner => {
            let x = coeffs(o)?;
            let y = read_flag::<Coeffs>(&o.input, "input")?.flat()?;
            ok(json!({ "value": ell2w_inner(&weights(o)?, &x, &y)? }))
        }
        NormOp::Tensor => ok(tensor_norm(&weights(o)?, &read_flag::<Coeffs>(&o.coeffs, "coeffs")?.tensor()?)?),
        NormOp::Bp => {
            let blocks: Vec<BpBlock> = read_flag(&o.coeffs, "coeffs")?;
            ok(bp_norm(need(&o.p, "p")?, &blocks)?)
        }
        NormOp::Mixed => {
            let v: Vec<WeightSequence> = read_flag(&o.weights, "weights")?;
            let x: Vec<Vec<f64>> = read_flag(&o.coeffs, "coeffs")?;
            ok(mixed_p2w_norm(need(&o.p, "p")?, &v, &x)?)
        }
        NormOp::Conjugate => {
            let p = need(&o.p, "p")?;
            ok(json!({ "p": p, "q": conjugate_index(p)? }))
        }
    }
}

fn classify(op: &ClassifyOp, o: &Opts) -> Res<Outcome> {
    match op {
        ClassifyOp::Weights => {
            let grid: Vec<f64> = match &o.input {
                Some(path) => read(path)?,
                None => vec![0.5, 0.1, 0.01, 0.001],
            };
            ok(classify_weights(&weights(o)?, &grid)?)
        }
        ClassifyOp::Canonical => {
            let case: CanonicalCase = need(&o.case, "case")?.parse()?;
            ok(canonical_weights(need(&o.p, "p")?, case, need(&o.len, "len")?)?)
        }
    }
}

fn blocks(op: &BlocksOp, o: &Opts) -> Res<Outcome> {
    let w = weights(o)?;
    let system = || -> Res<_> {
        let part: BlockPartition = read_flag(&o.input, "input")?;
        Ok(build_blocks(&w, &part)?)
    };
    match op {
        BlocksOp::Build => ok(system()?),
        BlocksOp::Isometry => ok(block_isometry_check(&system()?, &coeffs(o)?)?),
        BlocksOp::Greedy => {
            let targets: Vec<f64> = read_flag(&o.input, "input")?;
            ok(greedy_partition(&w, &targets)?)
        }
        BlocksOp::Project => {
            let sys = system()?;
            let x = coeffs(o)?;
            ok(json!({
                "coefficients": projection_coefficients(&sys, &x)?,
                "projection": project(&sys, &x)?,
            }))
        }
        BlocksOp::Contraction => ok(projection_contraction_check(&system()?, &coeffs(o)?)?),
        BlocksOp::Design => ok(lpn_block_design(&w, usize_flag(o.n, "n")?, need(&o.count, "count")?)?),
        BlocksOp::Lpn => {
            let n = usize_flag(o.n, "n")?;
            let sys = lpn_block_design(&w, n, need(&o.count, "count")?)?;
            let ids: Vec<usize> = read_flag(&o.input, "input")?;
            ok(lpn_isometry_check(&sys, n, &coeffs(o)?, &ids)?)
        }
    }
}

fn dualsup(o: &Opts) -> Res<Outcome> {
    let mode = match (o.m, &o.coeffs) {
        (Some(m), None) => DualMode::HeadSum { m: usize_flag(Some(m), "m")? },
        (None, Some(_)) => DualMode::Strip { lambda: coeffs(o)? },
        _ => return Err(CliError::Usage("give exactly one of --m (head sum) or --coeffs (strip)".into())),
    };
    let opts = DualSupOptions {
        ascent: AscentConfig { seed: DEFAULT_SEED ^ o.seed, ..AscentConfig::default() },
        warm_start: !o.cold,
    };
    let report = dual_sup_unit_ball(need(&o.p, "p")?, usize_flag(o.n, "n")?, &mode, &opts)?;
    if o.verbose {
        for r in &report.restarts {
            eprintln!("{}", serde_json::to_string(r).expect("records serialize"));
        }
    }
    ok(report)
}

fn family(o: &Opts, default_len: Option<usize>) -> Res<RVFamily> {
    let name = o.family.clone().unwrap_or_else(|| "three_valued".into());
    let len = || -> Res<usize> {
        match (o.n, default_len) {
            (Some(n), _) => usize_flag(Some(n), "n"),
            (None, Some(l)) => Ok(l),
            (None, None) => Err(CliError::Usage("missing --n".into())),
        }
    };
    Ok(match name.as_str() {
        "three_valued" => RVFamily::from_weights(&weights(o)?)?,
        "rademacher" => RVFamily::rademacher(len()?),
        "stable" => RVFamily::stable(need(&o.t, "t")?, len()?)?,
        "custom" => RVFamily::custom(read_flag(&o.input, "input")?)?,
        other => return Err(CliError::Usage(format!("unknown family '{other}'"))),
    })
}

/// Family and coefficients; coefficients default to all ones.
fn family_and_coeffs(o: &Opts) -> Res<(RVFamily, Vec<f64>)> {
    let c = match &o.coeffs {
        Some(_) => Some(coeffs(o)?),
        None => None,
    };
    let fam = family(o, c.as_ref().map(Vec::len))?;
    let c = c.unwrap_or_else(|| vec![1.0; fam.len()]);
    Ok((fam, c))
}

fn evaluation(o: &Opts) -> Evaluation {
    match o.trials {
        Some(trials) => Evaluation::MonteCarlo { trials, seed: o.seed },
        None => Evaluation::Exact,
    }
}

fn rosenthal(op: &RosenthalOp, o: &Opts) -> Res<Outcome> {
    match op {
        RosenthalOp::Check => {
            let (fam, c) = family_and_coeffs(o)?;
            let p = match (o.p, &o.weights) {
                (Some(p), _) => p,
                (None, Some(_)) => weights(o)?.p(),
                (None, None) => return Err(CliError::Usage("missing --p".into())),
            };
            ok(rosenthal_check(&fam, &c, p, evaluation(o))?)
        }
        RosenthalOp::Lemma24 => {
            let (fam, c) = family_and_coeffs(o)?;
            ok(lemma24_check(&fam, &c, need(&o.q, "q")?)?)
        }
        RosenthalOp::Pnorm => {
            let (fam, c) = family_and_coeffs(o)?;
            let r = need(&o.r, "r")?;
            match o.trials {
                Some(trials) => ok(mc_pnorm_of_sum(&fam, &c, r, trials, o.seed)?),
                None => ok(json!({ "value": exact_pnorm_of_sum(&fam, &c, r)? })),
            }
        }
        RosenthalOp::ThreeValued => {
            let rv = make_three_valued(need(&o.p, "p")?, need(&o.weight, "weight")?)?;
            ok(json!({ "alpha": rv.alpha, "mu": rv.mu, "l2": rv.lr_norm(2.0), "step_function": rv.step_function() }))
        }
        RosenthalOp::Sample => {
            let trials = usize::try_from(need(&o.trials, "trials")?)
                .map_err(|_| CliError::Usage("--trials is too large".into()))?;
            ok(json!({ "t": need(&o.t, "t")?, "seed": o.seed, "samples": sample_stable(need(&o.t, "t")?, trials, o.seed)? }))
        }
    }
}

fn khintchine(op: &KhintchineOp, o: &Opts) -> Res<Outcome> {
    let p = need(&o.p, "p")?;
    match op {
        KhintchineOp::Check => ok(khintchine_check(&coeffs(o)?, p)?),
        KhintchineOp::Kahane => {
            let a: Vec<Vec<f64>> = read_flag(&o.input, "input")?;
            ok(kahane_vector_check(&a, p)?)
        }
    }
}

#[derive(Deserialize)]
struct SpanInput {
    f: StepFunction,
    coordinate: usize,
    members: Vec<StepFunction>,
}

fn stepfn(op: &StepOp, o: &Opts) -> Res<Outcome> {
    let f = || -> Res<StepFunction> { read_flag(&o.input, "input") };
    match op {
        StepOp::Integrate => ok(json!({ "value": f()?.integrate() })),
        StepOp::Norm => ok(json!({ "value": f()?.lp_norm(need(&o.r, "r")?)? })),
        StepOp::Squeeze => ok(squeeze(&f()?, need(&o.k, "k")?, need(&o.p, "p")?)?),
        StepOp::Lift => {
            let ambient = CoordinateSpace::unit_intervals(need(&o.len, "len")?);
            ok(lift(&f()?, &ambient, need(&o.coord, "coord")?)?)
        }
        StepOp::Cond => ok(cond_expect(&f()?, &need(&o.keep, "keep")?)),
        StepOp::Branch => ok(branch_project(&f()?, &need(&o.keep, "keep")?)?),
        StepOp::Sproject => {
            let input: SpanInput = read_flag(&o.input, "input")?;
            let span = DesignatedSpan::new(input.coordinate, input.members)?;
            ok(s_projection(&input.f, &span)?)
        }
        StepOp::Disjoint => {
            let (b0, b1): (StepFunction, StepFunction) = read_flag(&o.input, "input")?;
            ok(disjoint_sum(&b0, &b1, need(&o.p, "p")?)?)
        }
        StepOp::Dyadic => ok(dyadic_level(need(&o.level, "level")?, need(&o.p, "p")?)?),
        StepOp::Haar => {
            let f = f()?;
            let order = o.order.clone().unwrap_or_else(|| (0..f.space().len()).collect());
            ok(haar_decompose(&f, &order)?)
        }
    }
}

#[derive(Deserialize)]
struct MapInput {
    target: FiniteRelation,
    map: BTreeMap<u64, u64>,
}

#[derive(Deserialize)]
struct PrecInput {
    u: LevelVector,
    v: LevelVector,
}

fn tree(op: &TreeOp, o: &Opts) -> Res<Outcome> {
    match op {
        TreeOp::Hindex => ok(h_index(&read_flag(&o.rel, "rel")?)),
        TreeOp::Mapcheck => {
            let r: FiniteRelation = read_flag(&o.rel, "rel")?;
            let input: MapInput = read_flag(&o.input, "input")?;
            let report = relation_map_check(&r, &input.target, &input.map)?;
            let mut doc = serde_json::to_value(&report).expect("reports serialize");
            doc["ok"] = json!(report.ok());
            ok(doc)
        }
        TreeOp::Embed => ok(embed_cfre(&read_flag(&o.tree, "tree")?)),
        TreeOp::Rank => {
            let t: CfreTree = read_flag(&o.tree, "tree")?;
            ok(json!({ "rank": tree_rank(&t) }))
        }
        TreeOp::Build => {
            let alpha: OrdinalCNF = need(&o.alpha, "alpha")?.parse()?;
            let d = Truncation::default();
            let trunc = Truncation { depth: o.depth.unwrap_or(d.depth), width: o.width.unwrap_or(d.width) };
            let t = build_t_alpha(&alpha, trunc)?;
            ok(json!({ "alpha": alpha.to_string(), "rank": tree_rank(&t), "tree": t }))
        }
        TreeOp::Branch => {
            let n = need(&o.n, "n")?;
            ok(json!({
                "n": n,
                "string": DyadicString::of_natural(n)?,
                "lambda": lambda_of(n)?,
                "branch": branch(n)?,
                "tree_upto": tree_upto(n)?,
                "level_set": level_set(n)?,
                "left_set": left_set(n)?,
                "right_set": right_set(n)?,
            }))
        }
        TreeOp::Dotprec => {
            let (m, n) = (need(&o.m, "m")?, need(&o.n, "n")?);
            ok(json!({ "m": m, "n": n, "dotprec": dotprec(m, n), "dotpreceq": dotpreceq(m, n) }))
        }
        TreeOp::Concat => {
            let parts: Vec<DyadicString> = read_flag(&o.input, "input")?;
            ok(parts.iter().fold(DyadicString::empty(), |acc, s| concat(&acc, s)))
        }
        TreeOp::Levelprec => {
            let input: PrecInput = read_flag(&o.input, "input")?;
            ok(json!({ "prec": level_prec(&input.u, &input.v, o.tol.unwrap_or(1e-12))? }))
        }
        TreeOp::Delta => {
            let u: LevelVector = read_flag(&o.input, "input")?;
            let budget = RatioConfig { seed: DEFAULT_SEED ^ o.seed, ..RatioConfig::default() };
            ok(delta_membership(&u, need(&o.delta, "delta")?, o.tol.unwrap_or(1e-9), &budget)?)
        }
        TreeOp::Lift => {
            let (tau, bar) = disjoint_lift(&read_flag(&o.input, "input")?)?;
            ok(json!({ "tau": tau, "bar": bar }))
        }
    }
}

fn suite(op: &SuiteOp, o: &Opts) -> Res<Outcome> {
    match op {
        SuiteOp::Acceptance => {
            let report = run_acceptance(o.seed)?;
            if o.verbose {
                for c in &report.criteria {
                    eprintln!("{}", c.line());
                }
            }
            let code = if report.passed { 0 } else { 1 };
            Ok(Outcome { code, ..ok(report)? })
        }
        SuiteOp::Criterion => {
            let id = u8::try_from(need(&o.n, "n")?).map_err(|_| CliError::Usage("--n names a criterion 1 to 13".into()))?;
            let c = run_criterion(id, o.seed)?;
            if o.verbose {
                eprintln!("{}", c.line());
            }
            let code = if c.passed { 0 } else { 1 };
            Ok(Outcome { code, ..ok(c)? })
        }
    }
}
