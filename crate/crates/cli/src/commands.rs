//! One function per subcommand; each returns a [`Report`] whose pass
//! flag decides the exit code, or a [`CliError`] for schema and budget
//! problems.

use std::path::Path;

use duality_core::duality::{
    check_duality_masked, check_intertwining, check_map_duality, check_sip_bep_duality,
    check_wf_dualities, commutant_with_budget, dq_matrix, invariant_measures,
    product_geq_matrix, product_neq_matrix, q_dual_params, thinning_kernel, Kernel,
    COMMUTANT_DIM_BUDGET,
};
use duality_core::exactnum::Rat;
use duality_core::liealg::{
    bargmann_rep, check_representation, conjugate_rep, heisenberg,
    heisenberg_monomial_rep, pauli_rep, pspauli_rep, spin_rep, su11_casimir,
    su11_conjugate, su11_ladder, su11_xyz, su2_casimir, su2_ladder, su2_xyz,
    RepReport, Representation,
};
use duality_core::linop::SparseOp;
use duality_core::models::{
    coalesce_map, copy_map, sip_from_blocks, sip_generator, validate_generator,
    wf_moment_dual, GeneratorBundle, LsParams,
};
use duality_core::scalar::{Backend, Scalar};
use duality_core::simulate::{euler_maruyama_wf, gillespie, mc_duality, SamplePlan};
use duality_core::statespace::ConfigSpace;

use crate::modelfile::{
    braco_partner, build_bundle, build_bundle_parts, build_graph, load, ls_params,
    parse_alphas, parse_rat, DualityKind, DualitySpec, ModelFile, ModelKind, SimTarget,
};
use crate::report::{
    backend_name, duality_outcome, kv, tv_bool, tv_float, tv_int, tv_str, Report,
    ResidualSummary, Witness,
};
use crate::{Cli, CliError, Command};

/// Pre-registered Monte Carlo acceptance threshold.
const Z_MAX: f64 = 4.0;

pub fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Validate { file } => validate_cmd(file),
        Command::DualityCheck { file } => duality_check_cmd(cli, file),
        Command::QDual { a, b, c, d, e, q } => q_dual_cmd(a, b, c, d, e, q),
        Command::ThinningCheck { file } => thinning_check_cmd(file),
        Command::Commutant { file } => commutant_cmd(cli, file),
        Command::InvariantMeasure { file } => invariant_measure_cmd(file),
        Command::RepCheck { rep, n, r, alpha, cap } => {
            rep_check_cmd(cli, rep, *n, r.as_deref(), alpha.as_deref(), *cap)
        }
        Command::SipBepCheck { file } => sip_bep_check_cmd(file),
        Command::WfCheck { s, cap } => wf_check_cmd(s, *cap),
        Command::McDuality { file } => mc_duality_cmd(cli, file),
    }
}

fn path_str(path: &Path) -> toml::Value {
    tv_str(path.display())
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn validate_cmd(path: &Path) -> Result<Report, CliError> {
    let file = load(path)?;
    let bundle = build_bundle(&file, false)?;
    let check = validate_generator(&bundle.op);
    let mut witnesses: Vec<Witness> = check
        .negative_entries
        .iter()
        .map(|(r, c, v)| Witness::entry(*r, *c, v))
        .collect();
    witnesses.extend(
        check
            .bad_rows
            .iter()
            .map(|(r, sum)| Witness::row(*r, format!("row sums to {sum}"))),
    );
    if check.truncated {
        witnesses.push(Witness::note("witness list truncated"));
    }
    let defects = check.negative_entries.len() + check.bad_rows.len();
    Ok(Report {
        command: "validate".into(),
        backend: backend_name(Backend::Exact),
        pass: check.valid,
        inputs: kv(vec![
            ("file", path_str(path)),
            ("model", tv_str(file.model.kind.as_str())),
            ("label", tv_str(&bundle.label)),
            ("dimension", tv_int(bundle.space.dim())),
        ]),
        residual: ResidualSummary::exact(defects),
        witnesses,
        details: None,
    })
}

// ---------------------------------------------------------------------------
// duality-check
// ---------------------------------------------------------------------------

fn duality_spec<'a>(file: &'a ModelFile, command: &str) -> Result<&'a DualitySpec, CliError> {
    file.duality
        .as_ref()
        .ok_or_else(|| CliError::Schema(format!("{command} needs a [duality] block")))
}

fn parse_matrix(rows: &[Vec<String>]) -> Result<SparseOp<Rat>, CliError> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(CliError::Schema("custom duality matrix is empty".into()));
    }
    let width = rows[0].len();
    let mut parsed = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != width {
            return Err(CliError::Schema("custom duality matrix is ragged".into()));
        }
        let entries: Result<Vec<Rat>, CliError> =
            row.iter().map(|s| parse_rat(s, "matrix entry")).collect();
        parsed.push(entries?);
    }
    Ok(SparseOp::from_rows(&parsed))
}

fn parse_state_map(spec: &str, space: &ConfigSpace) -> Result<Vec<usize>, CliError> {
    if spec == "identity" {
        return Ok((0..space.dim()).collect());
    }
    let site = |s: &str| -> Result<usize, CliError> {
        let i: usize = s
            .parse()
            .map_err(|_| CliError::Schema(format!("bad site index `{s}` in map `{spec}`")))?;
        if i >= space.sites() {
            return Err(CliError::Schema(format!("site {i} out of range in map `{spec}`")));
        }
        Ok(i)
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["copy", i, j] => Ok(copy_map(space, site(i)?, site(j)?)),
        ["coalesce", i, j] => Ok(coalesce_map(space, site(i)?, site(j)?)),
        ["flip", i] => {
            let i = site(i)?;
            Ok(space
                .configs()
                .iter()
                .map(|x| {
                    let mut t = x.clone();
                    t[i] = 1 - t[i];
                    space.index_of(&t).expect("flip stays inside a binary space")
                })
                .collect())
        }
        _ => Err(CliError::Schema(format!(
            "unknown map `{spec}`; expected copy:i:j, coalesce:i:j, flip:i, or identity"
        ))),
    }
}

/// The duality function named by the [duality] block, for a binary model
/// on `sites` sites (q and product-indicator kinds) or any model (custom).
fn duality_matrix(spec: &DualitySpec, sites: usize) -> Result<SparseOp<Rat>, CliError> {
    match spec.kind {
        DualityKind::Q => {
            let q = parse_rat(
                spec.q
                    .as_deref()
                    .ok_or_else(|| CliError::Schema("duality kind `q` requires `q`".into()))?,
                "q",
            )?;
            Ok(dq_matrix(sites, &q))
        }
        DualityKind::ProductIndicator => match spec.form.as_deref() {
            Some("neq") => Ok(product_neq_matrix(sites)),
            Some("geq") => Ok(product_geq_matrix(sites)),
            Some(other) => Err(CliError::Schema(format!(
                "unknown product-indicator form `{other}`; expected neq or geq"
            ))),
            None => Err(CliError::Schema(
                "duality kind `product-indicator` requires `form`".into(),
            )),
        },
        DualityKind::Custom => parse_matrix(
            spec.matrix
                .as_deref()
                .ok_or_else(|| CliError::Schema("duality kind `custom` requires `matrix`".into()))?,
        ),
        other => Err(CliError::Schema(format!(
            "duality kind `{}` is not a duality function; q, product-indicator, and custom apply here",
            other.as_str()
        ))),
    }
}

fn duality_check_cmd(cli: &Cli, path: &Path) -> Result<Report, CliError> {
    let file = load(path)?;
    let spec = duality_spec(&file, "duality-check")?;
    match spec.kind {
        DualityKind::Thinning => {
            return Err(CliError::Schema(
                "duality kind `thinning` is an intertwining; use thinning-check".into(),
            ))
        }
        DualityKind::GammaKernel => {
            return Err(CliError::Schema(
                "duality kind `gamma-kernel` is polynomial-level; use sip-bep-check".into(),
            ))
        }
        _ => {}
    }

    if spec.x_map.is_some() || spec.y_map.is_some() {
        return map_duality_check(path, &file, spec);
    }

    if matches!(spec.kind, DualityKind::Q | DualityKind::ProductIndicator)
        && !file.model.kind.is_binary_family()
    {
        return Err(CliError::Schema(format!(
            "duality kind `{}` applies to binary-configuration models, not `{}`",
            spec.kind.as_str(),
            file.model.kind.as_str()
        )));
    }

    let graph = build_graph(file.sites, &file.graph)?;
    let l = build_bundle_parts(file.sites, &graph, &file.model, true)?;

    // The dual generator: explicit when given, the q-dual for q-duality,
    // the model itself otherwise. Signed dual parameters are allowed;
    // the matrix identity is still checked and Markovianity is flagged.
    let (lhat, dual_label) = match (&spec.dual, spec.kind) {
        (Some(dual), _) => {
            let bundle = build_bundle_parts(file.sites, &graph, dual, false)?;
            (bundle, None)
        }
        (None, DualityKind::Q) => {
            let q = parse_rat(spec.q.as_deref().unwrap_or("missing"), "q")?;
            let params = ls_params(&file.model)?;
            let dual_params = q_dual_params(&params, &q)?;
            let bundle =
                duality_core::models::lloyd_sudbury_operator(&dual_params, &graph);
            let tuple = format!(
                "({},{},{},{},{})",
                dual_params.a, dual_params.b, dual_params.c, dual_params.d, dual_params.e
            );
            (bundle, Some(tuple))
        }
        (None, _) => (l.clone(), None),
    };
    let dual_markov = validate_generator(&lhat.op).valid;

    let d = duality_matrix(spec, file.sites)?;
    let outcome =
        check_duality_masked(&l.op, &lhat.op, &d, cli.tol, &l.boundary_rows, &lhat.boundary_rows)?;
    let (residual, witnesses) = duality_outcome(&outcome);

    let mut inputs = vec![
        ("file", path_str(path)),
        ("model", tv_str(file.model.kind.as_str())),
        ("duality", tv_str(spec.kind.as_str())),
    ];
    if let Some(q) = &spec.q {
        inputs.push(("q", tv_str(q)));
    }
    if let Some(form) = &spec.form {
        inputs.push(("form", tv_str(form)));
    }

    let mut details = vec![
        ("dual_label", tv_str(&lhat.label)),
        ("dual_markov", tv_bool(dual_markov)),
        ("degenerate", tv_bool(outcome.degenerate)),
        ("skipped_rows", tv_int(outcome.skipped_rows.len())),
        ("skipped_cols", tv_int(outcome.skipped_cols.len())),
    ];
    if let Some(tuple) = dual_label {
        details.insert(0, ("dual_params", tv_str(tuple)));
    }

    Ok(Report {
        command: "duality-check".into(),
        backend: backend_name(Backend::Exact),
        pass: outcome.pass,
        inputs: kv(inputs),
        residual,
        witnesses,
        details: Some(kv(details)),
    })
}

fn map_duality_check(
    path: &Path,
    file: &ModelFile,
    spec: &DualitySpec,
) -> Result<Report, CliError> {
    if !file.model.kind.is_binary_family() {
        return Err(CliError::Schema(
            "map duality applies to binary-configuration models".into(),
        ));
    }
    let (Some(x_map), Some(y_map)) = (&spec.x_map, &spec.y_map) else {
        return Err(CliError::Schema(
            "map duality needs both `x_map` and `y_map`".into(),
        ));
    };
    let space = ConfigSpace::binary(file.sites)?;
    let m = parse_state_map(x_map, &space)?;
    let mhat = parse_state_map(y_map, &space)?;
    let d = duality_matrix(spec, file.sites)?;
    if d.rows() != space.dim() || d.cols() != space.dim() {
        return Err(CliError::Schema(format!(
            "duality matrix is {}x{} but the configuration space has dimension {}",
            d.rows(),
            d.cols(),
            space.dim()
        )));
    }
    let outcome = check_map_duality(&m, &mhat, &d);
    let witnesses: Vec<Witness> = outcome
        .witnesses
        .iter()
        .map(|(x, y)| Witness::entry(*x, *y, "D(m(x), y) != D(x, m'(y))"))
        .collect();
    Ok(Report {
        command: "duality-check".into(),
        backend: backend_name(Backend::Exact),
        pass: outcome.pass,
        inputs: kv(vec![
            ("file", path_str(path)),
            ("model", tv_str(file.model.kind.as_str())),
            ("duality", tv_str(spec.kind.as_str())),
            ("x_map", tv_str(x_map)),
            ("y_map", tv_str(y_map)),
        ]),
        residual: ResidualSummary::exact(outcome.witnesses.len()),
        witnesses,
        details: Some(kv(vec![("pairs_checked", tv_int(outcome.checked))])),
    })
}

// ---------------------------------------------------------------------------
// q-dual
// ---------------------------------------------------------------------------

fn q_dual_cmd(a: &str, b: &str, c: &str, d: &str, e: &str, q: &str) -> Result<Report, CliError> {
    let params = LsParams::new(
        parse_rat(a, "a")?,
        parse_rat(b, "b")?,
        parse_rat(c, "c")?,
        parse_rat(d, "d")?,
        parse_rat(e, "e")?,
    );
    let qr = parse_rat(q, "q")?;
    let dual = q_dual_params(&params, &qr)?;
    let back = q_dual_params(&dual, &qr)?;
    let involution_defects = usize::from(back != params);
    let tuple = format!("({},{},{},{},{})", dual.a, dual.b, dual.c, dual.d, dual.e);
    Ok(Report {
        command: "q-dual".into(),
        backend: backend_name(Backend::Exact),
        pass: involution_defects == 0,
        inputs: kv(vec![
            ("a", tv_str(a)),
            ("b", tv_str(b)),
            ("c", tv_str(c)),
            ("d", tv_str(d)),
            ("e", tv_str(e)),
            ("q", tv_str(q)),
        ]),
        residual: ResidualSummary::exact(involution_defects),
        witnesses: Vec::new(),
        details: Some(kv(vec![
            ("dual_params", tv_str(&tuple)),
            ("a", tv_str(&dual.a)),
            ("b", tv_str(&dual.b)),
            ("c", tv_str(&dual.c)),
            ("d", tv_str(&dual.d)),
            ("e", tv_str(&dual.e)),
            ("dual_markov", tv_bool(dual.is_nonnegative())),
        ])),
    })
}

// ---------------------------------------------------------------------------
// thinning-check
// ---------------------------------------------------------------------------

fn thinning_check_cmd(path: &Path) -> Result<Report, CliError> {
    let file = load(path)?;
    let spec = duality_spec(&file, "thinning-check")?;
    if spec.kind != DualityKind::Thinning {
        return Err(CliError::Schema(
            "thinning-check needs a [duality] block with kind = \"thinning\"".into(),
        ));
    }
    if !file.model.kind.is_binary_family() {
        return Err(CliError::Schema(
            "thinning intertwines binary-configuration models".into(),
        ));
    }
    let graph = build_graph(file.sites, &file.graph)?;
    let l = build_bundle_parts(file.sites, &graph, &file.model, true)?;

    let default_partner = |p_field: &Option<String>| -> Result<(GeneratorBundle, Rat), CliError> {
        if file.model.kind != ModelKind::BiasedVoter {
            return Err(CliError::Schema(
                "thinning-check needs [duality.dual]; only biased-voter has a default partner"
                    .into(),
            ));
        }
        let s = parse_rat(
            file.model.s.as_deref().expect("biased-voter requires s"),
            "s",
        )?;
        let (bundle, derived_p) = braco_partner(&graph, &s)?;
        let p = match p_field {
            Some(text) => parse_rat(text, "p")?,
            None => derived_p,
        };
        Ok((bundle, p))
    };

    let (lhat, p) = match (&spec.dual, &spec.p) {
        (Some(dual), Some(p_text)) => (
            build_bundle_parts(file.sites, &graph, dual, true)?,
            parse_rat(p_text, "p")?,
        ),
        (Some(dual), None) => {
            let (_, derived_p) = default_partner(&None)?;
            (build_bundle_parts(file.sites, &graph, dual, true)?, derived_p)
        }
        (None, p_field) => default_partner(p_field)?,
    };

    let kernel: Kernel = thinning_kernel(file.sites, &p)?;
    let outcome = check_intertwining(&l.op, &lhat.op, &kernel)?;
    let (residual, witnesses) = duality_outcome(&outcome);
    Ok(Report {
        command: "thinning-check".into(),
        backend: backend_name(Backend::Exact),
        pass: outcome.pass,
        inputs: kv(vec![
            ("file", path_str(path)),
            ("model", tv_str(file.model.kind.as_str())),
            ("p", tv_str(&p)),
        ]),
        residual,
        witnesses,
        details: Some(kv(vec![
            ("dual_label", tv_str(&lhat.label)),
            ("kernel_validated", tv_bool(kernel.is_validated())),
        ])),
    })
}

// ---------------------------------------------------------------------------
// commutant and invariant-measure
// ---------------------------------------------------------------------------

fn commutant_cmd(cli: &Cli, path: &Path) -> Result<Report, CliError> {
    let file = load(path)?;
    let l = build_bundle(&file, true)?;
    let budget = cli.budget.unwrap_or(COMMUTANT_DIM_BUDGET);
    let basis = commutant_with_budget(&l.op, budget)?;
    let defects: usize = basis
        .iter()
        .map(|s| s.matmul(&l.op).sub(&l.op.matmul(s)).nnz())
        .sum();
    Ok(Report {
        command: "commutant".into(),
        backend: backend_name(Backend::Exact),
        pass: defects == 0,
        inputs: kv(vec![
            ("file", path_str(path)),
            ("model", tv_str(file.model.kind.as_str())),
            ("budget", tv_int(budget)),
        ]),
        residual: ResidualSummary::exact(defects),
        witnesses: Vec::new(),
        details: Some(kv(vec![
            ("dimension", tv_int(basis.len())),
            ("operator_dimension", tv_int(l.op.rows())),
        ])),
    })
}

fn invariant_measure_cmd(path: &Path) -> Result<Report, CliError> {
    let file = load(path)?;
    let l = build_bundle(&file, true)?;
    let basis = invariant_measures(&l.op)?;
    let defects: usize = basis
        .iter()
        .map(|mu| {
            let image = l.op.left_apply(mu);
            image.iter().filter(|v| v.is_positive() || v.is_negative()).count()
        })
        .sum();
    let listed: Vec<toml::Value> = basis
        .iter()
        .take(10)
        .map(|mu| {
            toml::Value::Array(mu.iter().map(tv_str).collect())
        })
        .collect();
    let signed: Vec<toml::Value> = basis
        .iter()
        .take(10)
        .map(|mu| {
            let nonneg = mu.iter().all(|v| !v.is_negative());
            let nonpos = mu.iter().all(|v| !v.is_positive());
            tv_bool(nonneg || nonpos)
        })
        .collect();
    Ok(Report {
        command: "invariant-measure".into(),
        backend: backend_name(Backend::Exact),
        pass: defects == 0,
        inputs: kv(vec![
            ("file", path_str(path)),
            ("model", tv_str(file.model.kind.as_str())),
        ]),
        residual: ResidualSummary::exact(defects),
        witnesses: Vec::new(),
        details: Some(kv(vec![
            ("dimension", tv_int(basis.len())),
            ("measures", toml::Value::Array(listed)),
            ("signless", toml::Value::Array(signed)),
        ])),
    })
}

// ---------------------------------------------------------------------------
// rep-check
// ---------------------------------------------------------------------------

struct RepOutcome {
    backend: Backend,
    report: RepReport,
    casimir_worst: Option<f64>,
    commutation_only: bool,
}

fn masked_casimir_worst<T: Scalar>(rep: &Representation<T>, residual: &SparseOp<T>) -> f64 {
    let mask = rep.safe_mask();
    let mut worst = 0.0f64;
    for (row, col, v) in residual.iter() {
        if mask[row] && mask[col] {
            worst = worst.max(v.magnitude());
        }
    }
    worst
}

fn rep_check_cmd(
    cli: &Cli,
    rep_name: &str,
    n: Option<u32>,
    r: Option<&str>,
    alpha: Option<&str>,
    cap: Option<usize>,
) -> Result<Report, CliError> {
    let mut inputs = vec![("rep", tv_str(rep_name))];
    let outcome = match rep_name {
        "pauli" => RepOutcome {
            backend: Backend::Exact,
            report: check_representation(&su2_xyz(), &pauli_rep(), 0.0)
                .map_err(|e| CliError::Schema(e.to_string()))?,
            casimir_worst: None,
            commutation_only: false,
        },
        "ps-pauli" => RepOutcome {
            backend: Backend::Exact,
            report: check_representation(&su11_xyz(), &pspauli_rep(), 0.0)
                .map_err(|e| CliError::Schema(e.to_string()))?,
            casimir_worst: None,
            commutation_only: false,
        },
        "spin" => {
            let n = n.ok_or_else(|| CliError::Schema("rep `spin` requires --n".into()))?;
            if n == 0 {
                return Err(CliError::Schema("spin index must be at least 1".into()));
            }
            inputs.push(("n", tv_int(n as usize)));
            inputs.push(("tol", tv_float(cli.tol)));
            let rep = spin_rep(n);
            let report = check_representation(&su2_ladder::<f64>(), &rep, cli.tol)
                .map_err(|e| CliError::Schema(e.to_string()))?;
            let c = su2_casimir(&rep).map_err(|e| CliError::Schema(e.to_string()))?;
            let expect = (n * (n + 2)) as f64;
            let residual = c.sub(&SparseOp::identity(rep.dim()).scale(&expect));
            RepOutcome {
                backend: Backend::Float,
                report,
                casimir_worst: Some(residual.max_magnitude()),
                commutation_only: false,
            }
        }
        "bargmann" => {
            let r_text = r.unwrap_or("1/2");
            let r_rat = parse_rat(r_text, "r")?;
            if !r_rat.is_positive() {
                return Err(CliError::Schema("bargmann index r must be positive".into()));
            }
            let cap = cap.unwrap_or(12);
            inputs.push(("r", tv_str(r_text)));
            inputs.push(("cap", tv_int(cap)));
            inputs.push(("tol", tv_float(cli.tol)));
            let rf = r_rat.to_f64();
            let rep = bargmann_rep(rf, cap);
            let report = check_representation(&su11_ladder::<f64>(), &rep, cli.tol)
                .map_err(|e| CliError::Schema(e.to_string()))?;
            let c = su11_casimir(&rep).map_err(|e| CliError::Schema(e.to_string()))?;
            let expect = rf * (rf - 1.0);
            let residual = c.sub(&SparseOp::identity(rep.dim()).scale(&expect));
            RepOutcome {
                backend: Backend::Float,
                report,
                casimir_worst: Some(masked_casimir_worst(&rep, &residual)),
                commutation_only: false,
            }
        }
        "kdef" => {
            let alpha_text = alpha.unwrap_or("1");
            let alpha_rat = parse_rat(alpha_text, "alpha")?;
            if !alpha_rat.is_positive() {
                return Err(CliError::Schema("weight alpha must be positive".into()));
            }
            let cap = cap.unwrap_or(12);
            inputs.push(("alpha", tv_str(alpha_text)));
            inputs.push(("cap", tv_int(cap)));
            RepOutcome {
                backend: Backend::Exact,
                report: check_representation(
                    &su11_conjugate::<Rat>(),
                    &conjugate_rep(&alpha_rat, cap),
                    0.0,
                )
                .map_err(|e| CliError::Schema(e.to_string()))?,
                casimir_worst: None,
                commutation_only: false,
            }
        }
        "heisenberg" => {
            let cap = cap.unwrap_or(16);
            inputs.push(("cap", tv_int(cap)));
            // The monomial basis is not orthonormal, so the adjoint
            // relations are out of scope; the bracket is the claim.
            RepOutcome {
                backend: Backend::Exact,
                report: check_representation(
                    &heisenberg::<Rat>(),
                    &heisenberg_monomial_rep(cap),
                    0.0,
                )
                .map_err(|e| CliError::Schema(e.to_string()))?,
                casimir_worst: None,
                commutation_only: true,
            }
        }
        other => {
            return Err(CliError::Schema(format!(
                "unknown rep `{other}`; expected pauli, ps-pauli, spin, bargmann, kdef, or heisenberg"
            )))
        }
    };

    let report = &outcome.report;
    let counted_failures: Vec<&String> = report
        .failures
        .iter()
        .filter(|f| !outcome.commutation_only || f.starts_with('['))
        .collect();
    let pass = if outcome.commutation_only {
        report.commutation_pass
    } else {
        report.pass()
    } && outcome.casimir_worst.map_or(true, |w| match outcome.backend {
        Backend::Exact => w == 0.0,
        Backend::Float => w <= cli.tol,
    });

    let residual = match outcome.backend {
        Backend::Exact => ResidualSummary::exact(
            counted_failures.len() + usize::from(outcome.casimir_worst.unwrap_or(0.0) > 0.0),
        ),
        Backend::Float => {
            let mut worst = report.worst_commutation.max(report.worst_adjoint);
            if let Some(w) = outcome.casimir_worst {
                worst = worst.max(w);
            }
            ResidualSummary::max_abs(worst)
        }
    };

    let witnesses: Vec<Witness> =
        counted_failures.iter().map(|f| Witness::note(f)).collect();

    let mut details = vec![
        ("commutation_pass", tv_bool(report.commutation_pass)),
        ("worst_commutation", tv_float(report.worst_commutation)),
    ];
    if let Some(ap) = report.adjoint_pass {
        details.push(("adjoint_pass", tv_bool(ap)));
        details.push(("worst_adjoint", tv_float(report.worst_adjoint)));
    }
    if outcome.commutation_only {
        details.push(("adjoint_in_scope", tv_bool(false)));
    }
    if let Some(w) = outcome.casimir_worst {
        details.push(("casimir_worst", tv_float(w)));
    }

    Ok(Report {
        command: "rep-check".into(),
        backend: backend_name(outcome.backend),
        pass,
        inputs: kv(inputs),
        residual,
        witnesses,
        details: Some(kv(details)),
    })
}

// ---------------------------------------------------------------------------
// sip-bep-check
// ---------------------------------------------------------------------------

fn sip_bep_check_cmd(path: &Path) -> Result<Report, CliError> {
    let file = load(path)?;
    if file.model.kind != ModelKind::Sip {
        return Err(CliError::Schema(
            "sip-bep-check needs model kind = \"sip\"".into(),
        ));
    }
    if let Some(spec) = &file.duality {
        if spec.kind != DualityKind::GammaKernel {
            return Err(CliError::Schema(
                "sip-bep-check verifies the gamma-kernel duality; set kind = \"gamma-kernel\""
                    .into(),
            ));
        }
    }
    let graph = build_graph(file.sites, &file.graph)?;
    let alphas = parse_alphas(&file.model, file.sites)?;
    let cap = file
        .model
        .cap
        .ok_or_else(|| CliError::Schema("model kind `sip` requires `cap`".into()))?;

    let poly = check_sip_bep_duality(&graph, &alphas, cap)?;
    let direct = sip_generator(&graph, &alphas, cap)?;
    let blocks = sip_from_blocks(&graph, &alphas, cap)?;
    let interior_diff = direct
        .op
        .sub(&blocks.op)
        .restrict_rows(&|row| direct.is_interior(row));
    let blocks_ok = interior_diff.is_empty();

    let mut witnesses: Vec<Witness> = poly
        .witnesses
        .iter()
        .map(|(config, diff)| {
            let row = direct.space.index_of(config).expect("config is in the space");
            Witness::row(row, format!("polynomial residual at x = {config:?}: {diff}"))
        })
        .collect();
    witnesses.extend(
        interior_diff
            .worst_entries(10)
            .into_iter()
            .map(|(r, c, v)| Witness::entry(r, c, format!("block mismatch {v}"))),
    );

    let defects = poly.witnesses.len() + interior_diff.nnz();
    Ok(Report {
        command: "sip-bep-check".into(),
        backend: backend_name(Backend::Exact),
        pass: poly.pass && blocks_ok,
        inputs: kv(vec![
            ("file", path_str(path)),
            ("model", tv_str(file.model.kind.as_str())),
            (
                "alpha",
                toml::Value::Array(alphas.iter().map(tv_str).collect()),
            ),
            ("cap", tv_int(cap as usize)),
        ]),
        residual: ResidualSummary::exact(defects),
        witnesses,
        details: Some(kv(vec![
            ("configurations_checked", tv_int(poly.checked)),
            ("blocks_match", tv_bool(blocks_ok)),
        ])),
    })
}

// ---------------------------------------------------------------------------
// wf-check
// ---------------------------------------------------------------------------

fn wf_check_cmd(s_text: &str, cap: u32) -> Result<Report, CliError> {
    let s = parse_rat(s_text, "s")?;
    let outcome = check_wf_dualities(&s, cap)?;
    let witnesses: Vec<Witness> = outcome.witnesses.iter().map(Witness::note).collect();
    Ok(Report {
        command: "wf-check".into(),
        backend: backend_name(Backend::Exact),
        pass: outcome.pass,
        inputs: kv(vec![("s", tv_str(s_text)), ("cap", tv_int(cap as usize))]),
        residual: ResidualSummary::exact(outcome.witnesses.len()),
        witnesses,
        details: Some(kv(vec![
            ("blocks_pass", tv_bool(outcome.blocks_pass)),
            ("rows_pass", tv_bool(outcome.rows_pass)),
            ("selfdual_pass", tv_bool(outcome.selfdual_pass)),
        ])),
    })
}

// ---------------------------------------------------------------------------
// mc-duality
// ---------------------------------------------------------------------------

fn mc_point(
    labels: Vec<(&str, toml::Value)>,
    est: &duality_core::simulate::McDualityEstimate,
) -> toml::Value {
    let mut pairs = labels;
    pairs.push(("lhs_mean", tv_float(est.lhs_mean)));
    pairs.push(("lhs_se", tv_float(est.lhs_se)));
    pairs.push(("rhs_mean", tv_float(est.rhs_mean)));
    pairs.push(("rhs_se", tv_float(est.rhs_se)));
    pairs.push(("z", tv_float(est.z)));
    toml::Value::Table(kv(pairs))
}

fn mc_duality_cmd(cli: &Cli, path: &Path) -> Result<Report, CliError> {
    let file = load(path)?;
    let sim = file
        .simulation
        .as_ref()
        .ok_or_else(|| CliError::Schema("mc-duality needs a [simulation] block".into()))?;
    if file.model.kind != ModelKind::Wf {
        return Err(CliError::Schema(
            "mc-duality drives the diffusion; set model kind = \"wf\"".into(),
        ));
    }
    crate::modelfile::check_fields(&file.model)?;
    let s = parse_rat(
        file.model
            .s
            .as_deref()
            .ok_or_else(|| CliError::Schema("model kind `wf` requires `s`".into()))?,
        "s",
    )?;
    if s.is_negative() {
        return Err(CliError::Schema("selection s must be nonnegative".into()));
    }
    let seed = cli.seed.unwrap_or(sim.seed);
    let sf = s.to_f64();

    let xs: Vec<(String, f64)> = sim
        .x_grid
        .iter()
        .map(|t| Ok((t.clone(), parse_rat(t, "x_grid entry")?.to_f64())))
        .collect::<Result<_, CliError>>()?;

    let mut points = Vec::new();
    let mut worst = 0.0f64;

    match sim.target {
        SimTarget::SelfDuality => {
            let ys: Vec<(String, f64)> = sim
                .y_grid
                .as_ref()
                .ok_or_else(|| CliError::Schema("target \"self\" needs `y_grid`".into()))?
                .iter()
                .map(|t| Ok((t.clone(), parse_rat(t, "y_grid entry")?.to_f64())))
                .collect::<Result<_, CliError>>()?;
            for &t in &sim.t_grid {
                for (x_label, x) in &xs {
                    for (y_label, y) in &ys {
                        let plan = SamplePlan::new(sim.replicates, t, seed, sim.step)?;
                        let xsamp = euler_maruyama_wf(&s, *x, &plan)?;
                        let ysamp = euler_maruyama_wf(&s, *y, &plan.rhs())?;
                        let est = mc_duality(
                            plan.replicates,
                            |rep| (-sf * xsamp.final_value(rep) * y).exp(),
                            |rep| (-sf * x * ysamp.final_value(rep)).exp(),
                        );
                        worst = worst.max(est.z);
                        points.push(mc_point(
                            vec![
                                ("x", tv_str(x_label)),
                                ("y", tv_str(y_label)),
                                ("t", tv_float(t)),
                            ],
                            &est,
                        ));
                    }
                }
            }
        }
        SimTarget::Moment => {
            let ns = sim
                .n_grid
                .as_ref()
                .ok_or_else(|| CliError::Schema("target \"moment\" needs `n_grid`".into()))?;
            let cap = sim.cap.unwrap_or(12);
            for &n in ns {
                if n > cap / 2 {
                    return Err(CliError::Schema(format!(
                        "moment grid point n = {n} exceeds cap/2 = {}; raise `cap`",
                        cap / 2
                    )));
                }
            }
            let bundle = wf_moment_dual(&s, cap)?;
            for &t in &sim.t_grid {
                for (x_label, x) in &xs {
                    for &n in ns {
                        let plan = SamplePlan::new(sim.replicates, t, seed, sim.step)?;
                        let xsamp = euler_maruyama_wf(&s, *x, &plan)?;
                        let start = bundle
                            .space
                            .index_of(&[n])
                            .expect("n is at most cap");
                        let chain = gillespie(&bundle, start, &plan.rhs())?;
                        let est = mc_duality(
                            plan.replicates,
                            |rep| (1.0 - xsamp.final_value(rep)).powi(n as i32),
                            |rep| {
                                let m = bundle.space.config(chain.final_state(rep))[0];
                                (1.0 - x).powi(m as i32)
                            },
                        );
                        worst = worst.max(est.z);
                        points.push(mc_point(
                            vec![
                                ("x", tv_str(x_label)),
                                ("n", tv_int(n as usize)),
                                ("t", tv_float(t)),
                            ],
                            &est,
                        ));
                    }
                }
            }
        }
    }

    Ok(Report {
        command: "mc-duality".into(),
        backend: backend_name(Backend::Float),
        pass: worst <= Z_MAX,
        inputs: kv(vec![
            ("file", path_str(path)),
            ("model", tv_str(file.model.kind.as_str())),
            ("s", tv_str(&s)),
            (
                "target",
                tv_str(match sim.target {
                    SimTarget::SelfDuality => "self",
                    SimTarget::Moment => "moment",
                }),
            ),
            ("replicates", tv_int(sim.replicates as usize)),
            ("step", tv_float(sim.step)),
            ("seed", tv_int(seed as usize)),
            ("z_max", tv_float(Z_MAX)),
        ]),
        residual: ResidualSummary::max_abs(worst),
        witnesses: Vec::new(),
        details: Some(kv(vec![("points", toml::Value::Array(points))])),
    })
}
