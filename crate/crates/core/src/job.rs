//! Job documents and the staged pipeline run by the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::chain::Chain;
use crate::deform::{complete_to_flat, syzygy_residues, Completion, GeneratorSet, Obstruction, Pair};
use crate::error::{Error, Result};
use crate::fiber::{analyze_point, semicontinuity_report, PointSpec, SemicontinuitySummary, SingularityReport, Verdict};
use crate::field::{Field, FieldElem, FieldSpec};
use crate::oracle::{enumerate_points, jacobian_corank, specialize_ideal, DEFAULT_BUDGET};
use crate::scalars::DvrSpec;
use crate::series::{Series, SeriesRing};
use crate::shift::{check_far_form, normalize, read_normal_form, NormalizedDeformation, PointMap};

pub const TOOL: &str = "toric-deform";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct JobDocument {
    pub base: DvrSpec,
    /// Chain literal such as `[3,2]`.
    pub chain: String,
    pub deformation: DeformationInput,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coordinate_changes: Vec<CoordinateChange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSettings>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub enum DeformationInput {
    /// `h` with `g'_{i-1,i+1} = x_{i-1} x_{i+1} - x_i^{a_i} + t h`, keyed by `i`.
    Consecutive(BTreeMap<String, String>),
    /// Every generator, keyed by `"i,j"`.
    Generators(BTreeMap<String, String>),
}

/// `x_variable -> image`, applied after completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinateChange {
    pub variable: usize,
    pub image: String,
}

fn one() -> String {
    "1".into()
}

fn one_u32() -> u32 {
    1
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct AnalysisSettings {
    pub field: FieldSpec,
    #[serde(default = "one")]
    pub tau: String,
    /// Points in normalized coordinates for the `analyze` stage.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<String>>,
    #[serde(default = "one_u32")]
    pub extension: u32,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

impl AnalysisSettings {
    /// The field points live in: `field` enlarged by `extension`.
    pub fn scan_field(&self) -> Result<Field> {
        let spec = match self.field {
            FieldSpec::Finite { p, m } => FieldSpec::Finite { p, m: m * self.extension },
            FieldSpec::Rationals if self.extension == 1 => FieldSpec::Rationals,
            FieldSpec::Rationals => return Err(Error::InvalidField("Q has no finite extensions here".into())),
        };
        Field::new(spec)
    }
}

fn parse_pair(key: &str) -> Result<Pair> {
    let (i, j) = key
        .split_once(',')
        .ok_or_else(|| Error::Job(format!("generator key {key:?} is not \"i,j\"")))?;
    let i = i.trim().parse().map_err(|_| Error::Job(format!("bad index in {key:?}")))?;
    let j = j.trim().parse().map_err(|_| Error::Job(format!("bad index in {key:?}")))?;
    Ok((i, j))
}

pub fn pair_key((i, j): Pair) -> String {
    format!("{i},{j}")
}

impl JobDocument {
    pub fn from_json(s: &str) -> Result<Self> {
        let job: JobDocument = serde_json::from_str(s).map_err(|e| Error::Job(e.to_string()))?;
        job.validate()?;
        Ok(job)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("job documents serialize")
    }

    /// Structural checks that do not need any algebra.
    pub fn validate(&self) -> Result<()> {
        let chain = self.chain()?;
        let e = chain.e();
        match &self.deformation {
            DeformationInput::Consecutive(h) => {
                for k in h.keys() {
                    let i: usize = k.parse().map_err(|_| Error::Job(format!("bad index {k:?}")))?;
                    if i < 2 || i + 1 > e {
                        return Err(Error::Job(format!("index {i} outside 2..={}", e - 1)));
                    }
                }
            }
            DeformationInput::Generators(g) => {
                for k in g.keys() {
                    let (i, j) = parse_pair(k)?;
                    if i == 0 || j > e || j < i + 2 {
                        return Err(Error::Job(format!("pair {k:?} is not a generator of a chain with e = {e}")));
                    }
                }
            }
        }
        for c in &self.coordinate_changes {
            if c.variable == 0 || c.variable > e {
                return Err(Error::Job(format!("coordinate change of x{} with e = {e}", c.variable)));
            }
        }
        if let Some(a) = &self.analysis {
            if a.extension == 0 {
                return Err(Error::Job("extension degree must be positive".into()));
            }
            if a.points.iter().any(|p| p.len() != e) {
                return Err(Error::Job(format!("points must have {e} coordinates")));
            }
        }
        Ok(())
    }

    pub fn chain(&self) -> Result<Chain> {
        let c = Chain::parse(&self.chain)?;
        c.ensure_reduced()?;
        Ok(c)
    }

    pub fn ring(&self) -> Result<SeriesRing> {
        let c = self.chain()?;
        Ok(SeriesRing::new(c.e(), self.base, c.default_cap()))
    }

    pub fn with_truncation(&self, n: u32) -> Result<JobDocument> {
        Ok(JobDocument { base: self.base.with_truncation(n)?, ..self.clone() })
    }

    fn consecutive(&self, ring: &SeriesRing) -> Result<BTreeMap<usize, Series>> {
        match &self.deformation {
            DeformationInput::Consecutive(h) => h
                .iter()
                .map(|(k, s)| Ok((k.parse().map_err(|_| Error::Job(format!("bad index {k:?}")))?, ring.parse(s)?)))
                .collect(),
            DeformationInput::Generators(_) => Ok(BTreeMap::new()),
        }
    }

    /// Completed generator set in the input coordinates, or the obstruction.
    pub fn complete(&self) -> Result<Completion> {
        let chain = self.chain()?;
        let ring = self.ring()?;
        let completion = match &self.deformation {
            DeformationInput::Consecutive(_) => complete_to_flat(&chain, ring.clone(), &self.consecutive(&ring)?)?,
            DeformationInput::Generators(g) => {
                let g = g
                    .iter()
                    .map(|(k, s)| Ok((parse_pair(k)?, ring.parse(s)?)))
                    .collect::<Result<BTreeMap<_, _>>>()?;
                let gs = GeneratorSet::from_generators(&chain, ring.clone(), g)?;
                match syzygy_residues(&gs)?.into_iter().find(|(_, r)| !r.is_zero()) {
                    Some(((kind, triple), r)) => Completion::Obstructed(Obstruction {
                        order: r.min_t_degree(),
                        kind,
                        triple,
                        residue: r.to_string(),
                    }),
                    None => Completion::Flat(gs),
                }
            }
        };
        let Completion::Flat(mut gs) = completion else {
            return Ok(completion);
        };
        for c in &self.coordinate_changes {
            gs = gs.substitute(c.variable, &ring.parse(&c.image)?)?.relift()?;
        }
        Ok(Completion::Flat(gs))
    }
}

/// Outcome of completing and normalizing a job.
#[derive(Debug, Clone)]
pub enum Normalized {
    Obstructed(Obstruction),
    Done { original: GeneratorSet, normal: NormalizedDeformation },
}

pub fn run_normalize(job: &JobDocument) -> Result<Normalized> {
    match job.complete()? {
        Completion::Obstructed(o) => Ok(Normalized::Obstructed(o)),
        Completion::Flat(original) => {
            let normal = normalize(&original)?;
            Ok(Normalized::Done { original, normal })
        }
    }
}

fn generators_json(gs: &GeneratorSet) -> Value {
    Value::Object(gs.generators().map(|(&p, g)| (pair_key(p), Value::String(g.to_string()))).collect())
}

fn generators_from_json(v: &Value, chain: &Chain, ring: &SeriesRing) -> Result<GeneratorSet> {
    let obj = v.as_object().ok_or_else(|| Error::Job("cached generators are not a map".into()))?;
    let g = obj
        .iter()
        .map(|(k, s)| {
            let s = s.as_str().ok_or_else(|| Error::Job("cached generator is not a string".into()))?;
            Ok((parse_pair(k)?, ring.parse(s)?))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    GeneratorSet::from_generators(chain, ring.clone(), g)
}

fn normal_form_json(d: &NormalizedDeformation) -> Value {
    let scalars = |m: &BTreeMap<usize, _>| -> Value {
        Value::Object(m.iter().map(|(k, v): (&usize, &crate::scalars::Scalar)| (k.to_string(), json!(v.to_string()))).collect())
    };
    json!({
        "c": scalars(&d.c),
        "kappa": scalars(&d.kappa),
        "h": Value::Object(d.h.iter().map(|(k, v)| (k.to_string(), json!(v.iter().map(|s| s.to_string()).collect::<Vec<_>>()))).collect()),
        "b-chain": d.b_chain(),
        "passes": d.passes,
        "audit": d.audit,
        "maps": d.maps.iter().map(|m| json!({"variable": m.variable, "image": m.image.to_string()})).collect::<Vec<_>>(),
        "generators": generators_json(&d.generators),
    })
}

fn content_key(parts: &Value) -> String {
    let mut h = Sha256::new();
    h.update(parts.to_string().as_bytes());
    hex::encode(h.finalize())
}

/// [`run_normalize`] through an optional on-disk cache keyed by the content
/// of everything the result depends on.
pub fn normalize_cached(job: &JobDocument, workspace: Option<&Path>) -> Result<Normalized> {
    let key = content_key(&json!({
        "tool": TOOL,
        "version": VERSION,
        "stage": "normalize",
        "base": job.base,
        "chain": job.chain,
        "deformation": job.deformation,
        "coordinate-changes": job.coordinate_changes,
    }));
    let path = workspace.map(|w| w.join(format!("{key}.json")));
    if let Some(p) = &path {
        if let Ok(text) = std::fs::read_to_string(p) {
            if let Ok(v) = serde_json::from_str::<Value>(&text) {
                if let Ok(n) = normalized_from_cache(job, &v) {
                    return Ok(n);
                }
            }
        }
    }
    let out = run_normalize(job)?;
    if let Some(p) = &path {
        let v = match &out {
            Normalized::Obstructed(o) => json!({ "obstruction": o }),
            Normalized::Done { original, normal } => json!({
                "original": generators_json(original),
                "normal": normal_form_json(normal),
            }),
        };
        std::fs::create_dir_all(p.parent().expect("cache file has a parent"))
            .and_then(|_| std::fs::write(p, serde_json::to_string_pretty(&v).expect("json")))
            .map_err(|e| Error::Job(format!("cannot write cache {}: {e}", p.display())))?;
    }
    Ok(out)
}

fn normalized_from_cache(job: &JobDocument, v: &Value) -> Result<Normalized> {
    if let Some(o) = v.get("obstruction") {
        let kind = serde_json::from_value(o["kind"].clone()).map_err(|e| Error::Job(e.to_string()))?;
        let triple = serde_json::from_value(o["triple"].clone()).map_err(|e| Error::Job(e.to_string()))?;
        return Ok(Normalized::Obstructed(Obstruction {
            order: o["order"].as_u64().unwrap_or(0) as u32,
            kind,
            triple,
            residue: o["residue"].as_str().unwrap_or("").to_string(),
        }));
    }
    let chain = job.chain()?;
    let ring = job.ring()?;
    let original = generators_from_json(&v["original"], &chain, &ring)?;
    let normal_gens = generators_from_json(&v["normal"]["generators"], &chain, &ring)?;
    let maps = v["normal"]["maps"]
        .as_array()
        .ok_or_else(|| Error::Job("cached maps missing".into()))?
        .iter()
        .map(|m| {
            let variable = m["variable"].as_u64().ok_or_else(|| Error::Job("bad cached map".into()))? as usize;
            let image = ring.parse(m["image"].as_str().unwrap_or(""))?;
            Ok(PointMap { variable, image })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut normal = read_normal_form(normal_gens, maps)?;
    normal.passes = v["normal"]["passes"].as_u64().unwrap_or(0) as usize;
    normal.audit = serde_json::from_value(v["normal"]["audit"].clone()).unwrap_or_default();
    Ok(Normalized::Done { original, normal })
}

/// Whether the computation at truncation `N` is unaffected by truncation:
/// redoing it at `N + 2` yields the same data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Exactness {
    pub completed: bool,
    pub normalized: bool,
    pub maps: bool,
}

impl Exactness {
    pub fn exact(&self) -> bool {
        self.completed && self.normalized && self.maps
    }
}

fn same_set(a: &GeneratorSet, b: &GeneratorSet) -> bool {
    a.retruncate(b.ring().spec()).is_ok_and(|x| &x == b)
}

pub fn exactness(
    job: &JobDocument,
    original: &GeneratorSet,
    normal: &NormalizedDeformation,
    workspace: Option<&Path>,
) -> Result<Exactness> {
    let not = Exactness { completed: false, normalized: false, maps: false };
    let Ok(wider) = job.with_truncation(job.base.n() + 2) else {
        return Ok(not);
    };
    let Ok(Normalized::Done { original: o2, normal: n2 }) = normalize_cached(&wider, workspace) else {
        return Ok(not);
    };
    let spec = o2.ring().spec();
    let maps = normal.maps.len() == n2.maps.len()
        && normal.maps.iter().zip(&n2.maps).all(|(x, y)| {
            x.variable == y.variable && x.image.retruncate(spec).is_ok_and(|i| i == y.image)
        });
    Ok(Exactness {
        completed: same_set(original, &o2),
        normalized: same_set(&normal.generators, &n2.generators),
        maps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanSource {
    /// Points of the completed input set, carried to normalized coordinates.
    Completed,
    /// Points of the normalized set itself.
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PointComparison {
    pub point: Vec<String>,
    pub corank: usize,
    pub report: SingularityReport,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScanReport {
    pub field: FieldSpec,
    pub tau: String,
    pub source: ScanSource,
    pub points: usize,
    /// Points the oracle or the analyzer considers singular.
    pub singular: Vec<PointComparison>,
    pub disagreements: Vec<PointComparison>,
    pub semicontinuity: SemicontinuitySummary,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty() && self.semicontinuity.passed
    }
}

/// Enumerate the fiber of `source` at `tau`, measure Jacobian coranks and
/// compare them with the analyzer at the corresponding normalized points.
pub fn cross_check(
    original: &GeneratorSet,
    normal: &NormalizedDeformation,
    field: &Field,
    tau: &FieldElem,
    budget: u64,
    source: ScanSource,
) -> Result<ScanReport> {
    let scanned = match source {
        ScanSource::Completed => original,
        ScanSource::Normalized => &normal.generators,
    };
    let ideal = specialize_ideal(scanned, field, tau)?;
    let points = enumerate_points(&ideal, 1, budget)?;
    let mut singular = Vec::new();
    let mut disagreements = Vec::new();
    let mut reports = Vec::new();
    for p in &points {
        let corank = jacobian_corank(&ideal, p)?;
        let q = match source {
            ScanSource::Completed => normal.map_point(p, field, tau)?,
            ScanSource::Normalized => p.clone(),
        };
        let report = analyze_point(normal, &PointSpec::new(field.clone(), tau.clone(), q))?;
        let expected = match report.verdict {
            Verdict::Smooth => 2,
            Verdict::Singular => report.e_prime,
        };
        let cmp = PointComparison {
            point: p.iter().map(|x| field.render(x)).collect(),
            corank,
            agrees: expected == corank,
            report: report.clone(),
        };
        if !cmp.agrees {
            disagreements.push(cmp.clone());
        }
        if corank > 2 || report.verdict == Verdict::Singular {
            singular.push(cmp);
        }
        reports.push(report);
    }
    Ok(ScanReport {
        field: field.spec(),
        tau: field.encode(tau),
        source,
        points: points.len(),
        singular,
        disagreements,
        semicontinuity: semicontinuity_report(&reports),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Gens,
    CheckSyzygies,
    Complete,
    Normalize,
    Analyze,
    OracleScan,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::Gens, Stage::CheckSyzygies, Stage::Complete, Stage::Normalize, Stage::Analyze, Stage::OracleScan];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Gens => "gens",
            Stage::CheckSyzygies => "check-syzygies",
            Stage::Complete => "complete",
            Stage::Normalize => "normalize",
            Stage::Analyze => "analyze",
            Stage::OracleScan => "oracle-scan",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Job(format!("unknown stage {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Obstructed,
    Violation,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Obstructed => 2,
            Status::Violation => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct StageReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub stage: Stage,
    pub status: Status,
    pub base: DvrSpec,
    pub truncation: u32,
    pub input: JobDocument,
    pub result: Value,
}

impl StageReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn analysis_or_default(job: &JobDocument) -> AnalysisSettings {
    job.analysis.clone().unwrap_or(AnalysisSettings {
        field: FieldSpec::Rationals,
        tau: one(),
        points: Vec::new(),
        extension: 1,
        budget: DEFAULT_BUDGET,
    })
}

/// Run one stage of a job. Earlier stages are recomputed or read from the
/// workspace cache as needed.
pub fn run_stage(job: &JobDocument, stage: Stage, workspace: Option<&Path>) -> Result<StageReport> {
    job.validate()?;
    let chain = job.chain()?;
    let ring = job.ring()?;
    let (status, result) = match stage {
        Stage::Gens => {
            let templates: serde_json::Map<String, Value> = chain
                .generators(&ring)?
                .into_iter()
                .map(|t| (pair_key((t.i, t.j)), json!(t.body.to_string())))
                .collect();
            let mut result = json!({ "generators": templates });
            if let DeformationInput::Consecutive(_) = job.deformation {
                let gs = GeneratorSet::from_consecutive(&chain, ring.clone(), &job.consecutive(&ring)?)?;
                result["deformed"] = generators_json(&gs);
            }
            (Status::Ok, result)
        }
        Stage::CheckSyzygies => {
            let report = chain.verify_syzygies(&ring)?;
            let status = if report.passed() { Status::Ok } else { Status::Violation };
            (status, json!({ "checked": report.checked, "failure": report.failure.map(|f| format!("{f:?}")) }))
        }
        Stage::Complete => match job.complete()? {
            Completion::Obstructed(o) => (Status::Obstructed, json!({ "verdict": "obstructed", "obstruction": o })),
            Completion::Flat(gs) => (Status::Ok, json!({ "verdict": "flat", "generators": generators_json(&gs) })),
        },
        Stage::Normalize => match normalize_cached(job, workspace)? {
            Normalized::Obstructed(o) => (Status::Obstructed, json!({ "obstruction": o })),
            Normalized::Done { normal, .. } => {
                let far = check_far_form(&normal)?;
                let special = normal.generators.special_fiber_is_undeformed()?;
                let status = if far.is_empty() && special { Status::Ok } else { Status::Violation };
                let mut v = normal_form_json(&normal);
                v["far-form-violations"] = json!(far);
                v["special-fiber-undeformed"] = json!(special);
                (status, v)
            }
        },
        Stage::Analyze => match normalize_cached(job, workspace)? {
            Normalized::Obstructed(o) => (Status::Obstructed, json!({ "obstruction": o })),
            Normalized::Done { normal, .. } => {
                let a = analysis_or_default(job);
                let field = a.scan_field()?;
                let tau = field.parse_elem(&a.tau)?;
                let points = if a.points.is_empty() { vec![vec!["0".to_string(); chain.e()]] } else { a.points.clone() };
                let mut reports = Vec::new();
                for p in &points {
                    let lambda = p.iter().map(|s| field.parse_elem(s)).collect::<Result<Vec<_>>>()?;
                    reports.push(analyze_point(&normal, &PointSpec::new(field.clone(), tau.clone(), lambda))?);
                }
                let summary = semicontinuity_report(&reports);
                let status = if summary.passed { Status::Ok } else { Status::Violation };
                (status, json!({ "b-chain": normal.b_chain(), "reports": reports, "semicontinuity": summary }))
            }
        },
        Stage::OracleScan => match normalize_cached(job, workspace)? {
            Normalized::Obstructed(o) => (Status::Obstructed, json!({ "obstruction": o })),
            Normalized::Done { original, normal } => {
                let a = job
                    .analysis
                    .clone()
                    .ok_or_else(|| Error::Job("oracle-scan needs an analysis section with a finite field".into()))?;
                let field = a.scan_field()?;
                let tau = field.parse_elem(&a.tau)?;
                let ex = exactness(job, &original, &normal, workspace)?;
                let source = if ex.exact() { ScanSource::Completed } else { ScanSource::Normalized };
                let scan = cross_check(&original, &normal, &field, &tau, a.budget, source)?;
                let status = if scan.passed() { Status::Ok } else { Status::Violation };
                (status, json!({ "exactness": ex, "scan": scan, "agreement": if scan.passed() { "pass" } else { "fail" } }))
            }
        },
    };
    Ok(StageReport {
        tool: TOOL,
        version: VERSION,
        stage,
        status,
        base: job.base,
        truncation: job.base.n(),
        input: job.clone(),
        result,
    })
}
