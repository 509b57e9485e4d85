//! Model file schema and construction of the objects it describes.
//! Unknown keys are rejected everywhere; all rational inputs are
//! strings, so floats never cross the exact boundary.

use std::path::Path;

use serde::Deserialize;

use duality_core::exactnum::Rat;
use duality_core::scalar::Scalar;
use duality_core::models::{
    braco, lloyd_sudbury, lloyd_sudbury_operator, sep_generator, sip_generator,
    wf_moment_dual, wf_moment_dual_operator, GeneratorBundle, LsParams,
};
use duality_core::statespace::SiteGraph;

use crate::CliError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub sites: usize,
    pub graph: GraphSpec,
    pub model: ModelSpec,
    pub duality: Option<DualitySpec>,
    pub simulation: Option<SimulationSpec>,
}

#[derive(Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    /// One of "complete", "cycle", "path", all edges at rate 1.
    Preset(String),
    /// Explicit `[i, j, "rate"]` triples.
    Edges(Vec<(usize, usize, String)>),
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub a: Option<String>,
    pub b: Option<String>,
    pub c: Option<String>,
    pub d: Option<String>,
    pub e: Option<String>,
    pub lambda: Option<String>,
    pub s: Option<String>,
    pub alpha: Option<Vec<String>>,
    pub cap: Option<u32>,
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Voter,
    Contact,
    BiasedVoter,
    Braco,
    LloydSudbury,
    Sep,
    Sip,
    WfMoment,
    Wf,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Voter => "voter",
            ModelKind::Contact => "contact",
            ModelKind::BiasedVoter => "biased-voter",
            ModelKind::Braco => "braco",
            ModelKind::LloydSudbury => "lloyd-sudbury",
            ModelKind::Sep => "sep",
            ModelKind::Sip => "sip",
            ModelKind::WfMoment => "wf-moment",
            ModelKind::Wf => "wf",
        }
    }

    /// Reaction-diffusion family on binary configurations, including
    /// exclusion, which is the (0,0,0,0,1) parameter point.
    pub fn is_binary_family(self) -> bool {
        matches!(
            self,
            ModelKind::Voter
                | ModelKind::Contact
                | ModelKind::BiasedVoter
                | ModelKind::Braco
                | ModelKind::LloydSudbury
                | ModelKind::Sep
        )
    }
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct DualitySpec {
    pub kind: DualityKind,
    pub q: Option<String>,
    /// Product-indicator form: "neq" or "geq".
    pub form: Option<String>,
    /// Thinning survival probability.
    pub p: Option<String>,
    /// Custom duality function, rows indexed by the primal states.
    pub matrix: Option<Vec<Vec<String>>>,
    /// Pathwise map duality: "copy:i:j", "coalesce:i:j", "flip:i",
    /// "identity". When both maps are given, duality-check verifies
    /// D(m(x), y) = D(x, m'(y)) exhaustively instead of the generators.
    pub x_map: Option<String>,
    pub y_map: Option<String>,
    /// Explicit dual model on the same sites and graph.
    pub dual: Option<ModelSpec>,
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "kebab-case")]
pub enum DualityKind {
    Q,
    ProductIndicator,
    Thinning,
    GammaKernel,
    Custom,
}

impl DualityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DualityKind::Q => "q",
            DualityKind::ProductIndicator => "product-indicator",
            DualityKind::Thinning => "thinning",
            DualityKind::GammaKernel => "gamma-kernel",
            DualityKind::Custom => "custom",
        }
    }
}

#[derive(Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub replicates: u64,
    pub step: f64,
    pub seed: u64,
    pub target: SimTarget,
    pub t_grid: Vec<f64>,
    /// Diffusion starting points, rational strings in [0, 1].
    pub x_grid: Vec<String>,
    /// Dual diffusion starting points (target = "self").
    pub y_grid: Option<Vec<String>>,
    /// Dual moment-chain starting points (target = "moment").
    pub n_grid: Option<Vec<u32>>,
    /// Moment-chain truncation cap (target = "moment").
    pub cap: Option<u32>,
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq, Debug)]
pub enum SimTarget {
    #[serde(rename = "self")]
    SelfDuality,
    #[serde(rename = "moment")]
    Moment,
}

pub fn load(path: &Path) -> Result<ModelFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

pub fn parse_rat(s: &str, what: &str) -> Result<Rat, CliError> {
    Rat::parse(s).map_err(|e| CliError::Schema(format!("{what}: {e}")))
}

pub fn build_graph(sites: usize, spec: &GraphSpec) -> Result<SiteGraph, CliError> {
    match spec {
        GraphSpec::Preset(name) => match name.as_str() {
            "complete" => Ok(SiteGraph::complete(sites)),
            "cycle" => Ok(SiteGraph::cycle(sites)),
            "path" => Ok(SiteGraph::path(sites)),
            other => Err(CliError::Schema(format!(
                "unknown graph preset `{other}`; expected complete, cycle, or path"
            ))),
        },
        GraphSpec::Edges(triples) => {
            let mut edges = Vec::with_capacity(triples.len());
            for (i, j, rate) in triples {
                edges.push((*i, *j, parse_rat(rate, "edge rate")?));
            }
            Ok(SiteGraph::from_edges(sites, &edges)?)
        }
    }
}

/// Reject parameters that do not apply to the declared model kind.
pub fn check_fields(spec: &ModelSpec) -> Result<(), CliError> {
    let allowed: &[&str] = match spec.kind {
        ModelKind::Voter | ModelKind::Sep => &[],
        ModelKind::Contact => &["lambda"],
        ModelKind::BiasedVoter | ModelKind::Braco | ModelKind::Wf => &["s"],
        ModelKind::LloydSudbury => &["a", "b", "c", "d", "e"],
        ModelKind::Sip => &["alpha", "cap"],
        ModelKind::WfMoment => &["s", "cap"],
    };
    let present = [
        ("a", spec.a.is_some()),
        ("b", spec.b.is_some()),
        ("c", spec.c.is_some()),
        ("d", spec.d.is_some()),
        ("e", spec.e.is_some()),
        ("lambda", spec.lambda.is_some()),
        ("s", spec.s.is_some()),
        ("alpha", spec.alpha.is_some()),
        ("cap", spec.cap.is_some()),
    ];
    for (name, set) in present {
        if set && !allowed.contains(&name) {
            return Err(CliError::Schema(format!(
                "field `{name}` does not apply to model kind `{}`",
                spec.kind.as_str()
            )));
        }
    }
    Ok(())
}

fn required<'a>(field: &'a Option<String>, name: &str, kind: ModelKind) -> Result<&'a str, CliError> {
    field.as_deref().ok_or_else(|| {
        CliError::Schema(format!("model kind `{}` requires `{name}`", kind.as_str()))
    })
}

/// Reaction-diffusion parameters of a binary-family model.
pub fn ls_params(spec: &ModelSpec) -> Result<LsParams, CliError> {
    let zero = Rat::from_int(0);
    let one = Rat::from_int(1);
    match spec.kind {
        ModelKind::Voter => Ok(LsParams::from_ints(0, 1, 0, 1, 0)),
        ModelKind::Sep => Ok(LsParams::from_ints(0, 0, 0, 0, 1)),
        ModelKind::Contact => {
            let lambda = parse_rat(required(&spec.lambda, "lambda", spec.kind)?, "lambda")?;
            Ok(LsParams::new(zero.clone(), lambda, one.clone(), one, zero))
        }
        ModelKind::BiasedVoter => {
            let s = parse_rat(required(&spec.s, "s", spec.kind)?, "s")?;
            Ok(LsParams::new(zero.clone(), &one + &s, zero.clone(), one, zero))
        }
        ModelKind::Braco => {
            let s = parse_rat(required(&spec.s, "s", spec.kind)?, "s")?;
            Ok(LsParams::new(zero.clone(), s, one.clone(), zero.clone(), one))
        }
        ModelKind::LloydSudbury => {
            let parse = |f: &Option<String>, n: &str| match f {
                Some(text) => parse_rat(text, n),
                None => Ok(Rat::from_int(0)),
            };
            Ok(LsParams::new(
                parse(&spec.a, "a")?,
                parse(&spec.b, "b")?,
                parse(&spec.c, "c")?,
                parse(&spec.d, "d")?,
                parse(&spec.e, "e")?,
            ))
        }
        other => Err(CliError::Schema(format!(
            "model kind `{}` has no reaction-diffusion parameters",
            other.as_str()
        ))),
    }
}

/// Build the generator for `spec` on the given sites and graph.
/// `checked` enforces Markovianity; the unchecked path builds signed
/// operators so that `validate` can report their defects as witnesses.
pub fn build_bundle_parts(
    sites: usize,
    graph: &SiteGraph,
    spec: &ModelSpec,
    checked: bool,
) -> Result<GeneratorBundle, CliError> {
    check_fields(spec)?;
    match spec.kind {
        ModelKind::Sep => Ok(sep_generator(graph)),
        k if k.is_binary_family() => {
            let params = ls_params(spec)?;
            if checked {
                Ok(lloyd_sudbury(&params, graph)?)
            } else {
                Ok(lloyd_sudbury_operator(&params, graph))
            }
        }
        ModelKind::Sip => {
            let alphas = parse_alphas(spec, sites)?;
            let cap = spec
                .cap
                .ok_or_else(|| CliError::Schema("model kind `sip` requires `cap`".into()))?;
            Ok(sip_generator(graph, &alphas, cap)?)
        }
        ModelKind::WfMoment => {
            if sites != 1 {
                return Err(CliError::Schema(
                    "model kind `wf-moment` is a single-site chain; set sites = 1".into(),
                ));
            }
            let s = parse_rat(required(&spec.s, "s", spec.kind)?, "s")?;
            let cap = spec
                .cap
                .ok_or_else(|| CliError::Schema("model kind `wf-moment` requires `cap`".into()))?;
            if checked {
                Ok(wf_moment_dual(&s, cap)?)
            } else {
                Ok(wf_moment_dual_operator(&s, cap))
            }
        }
        ModelKind::Wf => Err(CliError::Schema(
            "the diffusion `wf` has no finite generator; use wf-check or mc-duality".into(),
        )),
        _ => unreachable!("binary family handled above"),
    }
}

pub fn parse_alphas(spec: &ModelSpec, sites: usize) -> Result<Vec<Rat>, CliError> {
    let raw = spec
        .alpha
        .as_ref()
        .ok_or_else(|| CliError::Schema("model kind `sip` requires `alpha`".into()))?;
    if raw.len() != sites {
        return Err(CliError::Schema(format!(
            "alpha has {} entries but the model has {sites} sites",
            raw.len()
        )));
    }
    raw.iter().map(|t| parse_rat(t, "alpha")).collect()
}

pub fn build_bundle(file: &ModelFile, checked: bool) -> Result<GeneratorBundle, CliError> {
    let graph = build_graph(file.sites, &file.graph)?;
    build_bundle_parts(file.sites, &graph, &file.model, checked)
}

/// The default thinning partner of a biased voter model: the
/// branching-coalescing walk with the same s, kept with p = s/(1+s).
pub fn braco_partner(graph: &SiteGraph, s: &Rat) -> Result<(GeneratorBundle, Rat), CliError> {
    let bundle = braco(s, graph)?;
    let p = s * &(&Rat::from_int(1) + s)
        .try_inv()
        .expect("1 + s is nonzero for nonnegative s");
    Ok((bundle, p))
}
