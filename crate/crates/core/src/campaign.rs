//! Randomized campaigns: draw consecutive perturbations and coordinate
//! changes, push each draw through the whole pipeline and tally the results.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::deform::Obstruction;
use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec};
use crate::job::{
    cross_check, exactness, run_normalize, AnalysisSettings, CoordinateChange, DeformationInput, Exactness,
    JobDocument, Normalized, ScanReport, ScanSource, VERSION,
};
use crate::oracle::DEFAULT_BUDGET;
use crate::scalars::{DvrKind, DvrSpec};
use crate::shift::{check_far_form, normalize, FarViolation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FuzzBounds {
    pub base: DvrSpec,
    pub max_entry: u32,
    pub max_e: usize,
    /// Largest power of `t` in a perturbation coefficient, beyond the overall `t`.
    pub max_t_degree: u32,
    pub coordinate_changes: usize,
    /// Scan fields, drawn uniformly per draw.
    pub fields: Vec<FieldSpec>,
    pub budget: u64,
}

impl FuzzBounds {
    pub fn new(base: DvrSpec) -> Self {
        FuzzBounds {
            base,
            max_entry: 3,
            max_e: 4,
            max_t_degree: 1,
            coordinate_changes: 2,
            fields: vec![FieldSpec::prime(5)],
            budget: DEFAULT_BUDGET,
        }
    }

    fn check(&self) -> Result<()> {
        if self.max_entry < 2 || self.max_e < 3 {
            return Err(Error::Job("fuzz bounds need max-entry >= 2 and max-e >= 3".into()));
        }
        if self.fields.is_empty() {
            return Err(Error::Job("fuzz bounds need at least one field".into()));
        }
        let p = self.base.p();
        for f in &self.fields {
            let ok = match (self.base.kind(), f) {
                (_, FieldSpec::Rationals) => false,
                (DvrKind::EqualCharZero, _) => true,
                (DvrKind::EqualCharP, f) => f.characteristic() == p,
                (DvrKind::MixedChar, f) => f.characteristic() != p,
            };
            if !ok {
                return Err(Error::Job(format!("scan field {f:?} does not fit the base {}", self.base)));
            }
        }
        Ok(())
    }
}

fn coefficient(rng: &mut ChaCha8Rng, max_t: u32) -> String {
    let mut parts = vec![format!("({})", [-2, -1, 1, 2].choose(rng).expect("nonempty"))];
    for k in 1..=max_t {
        if rng.gen_bool(0.3) {
            parts.push(format!("({})*t^{k}", rng.gen_range(-2..=2)));
        }
    }
    format!("({})", parts.join(" + "))
}

/// Draw number `index` of the campaign with this seed.
pub fn draw(bounds: &FuzzBounds, seed: u64, index: u64) -> Result<JobDocument> {
    bounds.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let e = rng.gen_range(3..=bounds.max_e);
    let a: Vec<u32> = (0..e - 2).map(|_| rng.gen_range(2..=bounds.max_entry)).collect();
    let mut h = std::collections::BTreeMap::new();
    for i in 2..e {
        let ai = a[i - 2];
        let mut terms = Vec::new();
        if rng.gen_bool(0.3) {
            terms.push(format!("{}*x{}", coefficient(&mut rng, bounds.max_t_degree), i - 1));
        }
        for k in 1..=ai {
            if rng.gen_bool(0.35) {
                terms.push(format!("{}*x{i}^{k}", coefficient(&mut rng, bounds.max_t_degree)));
            }
        }
        if rng.gen_bool(0.15) {
            let m = match rng.gen_range(0..3) {
                0 => format!("x{}*x{i}", i - 1),
                1 => format!("x{i}*x{}", i + 1),
                _ => format!("x{}", i + 1),
            };
            terms.push(format!("{}*{m}", coefficient(&mut rng, bounds.max_t_degree)));
        }
        if rng.gen_bool(0.05) {
            terms.push(coefficient(&mut rng, bounds.max_t_degree));
        }
        if !terms.is_empty() {
            h.insert(i.to_string(), terms.join(" + "));
        }
    }
    let mut changes = Vec::new();
    for _ in 0..rng.gen_range(0..=bounds.coordinate_changes) {
        let l = rng.gen_range(1..=e);
        let m = rng.gen_range(1..=e);
        if m == l {
            continue;
        }
        let k = rng.gen_range(1..=2);
        changes.push(CoordinateChange {
            variable: l,
            image: format!("x{l} + {}*t*x{m}^{k}", coefficient(&mut rng, 0)),
        });
    }
    let field_spec = *bounds.fields.choose(&mut rng).expect("fields checked nonempty");
    let field = Field::new(field_spec)?;
    let size = field.finite().map_or(2, |f| f.size());
    let tau = if bounds.base.kind() == DvrKind::MixedChar {
        field.one()
    } else {
        field.elem(rng.gen_range(1..size))
    };
    Ok(JobDocument {
        base: bounds.base,
        chain: Chain::new(a).to_string(),
        deformation: DeformationInput::Consecutive(h),
        coordinate_changes: changes,
        analysis: Some(AnalysisSettings {
            tau: field.encode(&tau),
            field: field_spec,
            points: Vec::new(),
            extension: 1,
            budget: bounds.budget,
        }),
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DrawStatus {
    /// The consecutive perturbation does not lift to a flat deformation.
    Obstructed,
    /// Flat, checked, and every check passed.
    Passed,
    /// Flat, but truncation changes the result, so the fiber is not scanned.
    Unstable,
    /// The chosen `tau` makes a unit of the normal form vanish.
    Degenerate,
    /// The scan would exceed the point budget.
    OverBudget,
    /// A property check failed.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct NormalFormCheck {
    pub passes: usize,
    pub within_bound: bool,
    pub idempotent: bool,
    pub special_fiber: bool,
    pub far_form: Vec<FarViolation>,
}

impl NormalFormCheck {
    pub fn passed(&self) -> bool {
        self.within_bound && self.idempotent && self.special_fiber && self.far_form.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DrawReport {
    pub index: u64,
    pub job: JobDocument,
    pub status: DrawStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<Obstruction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<NormalFormCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exactness: Option<Exactness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Run every check on one job: completion, normal form, truncation
/// exactness, and the oracle comparison.
pub fn evaluate(index: u64, job: &JobDocument) -> DrawReport {
    let mut report = DrawReport {
        index,
        job: job.clone(),
        status: DrawStatus::Failed,
        obstruction: None,
        normal_form: None,
        exactness: None,
        scan: None,
        note: None,
    };
    if let Err(e) = evaluate_into(job, &mut report) {
        report.status = match e {
            Error::DegenerateSpecialization(_) | Error::DenominatorCollision(_) => DrawStatus::Degenerate,
            Error::BudgetExceeded(_) | Error::DegreeCapExceeded { .. } => DrawStatus::OverBudget,
            _ => DrawStatus::Failed,
        };
        report.note = Some(e.to_string());
    }
    report
}

fn evaluate_into(job: &JobDocument, report: &mut DrawReport) -> Result<()> {
    let (original, normal) = match run_normalize(job)? {
        Normalized::Obstructed(o) => {
            report.status = DrawStatus::Obstructed;
            report.obstruction = Some(o);
            return Ok(());
        }
        Normalized::Done { original, normal } => (original, normal),
    };
    let again = normalize(&normal.generators)?;
    let check = NormalFormCheck {
        passes: normal.passes,
        within_bound: normal.passes <= job.base.n() as usize + 1,
        idempotent: again.c == normal.c && again.h == normal.h && again.kappa == normal.kappa,
        special_fiber: normal.generators.special_fiber_is_undeformed()?,
        far_form: check_far_form(&normal)?,
    };
    let nf_ok = check.passed();
    report.normal_form = Some(check);
    if !nf_ok {
        report.status = DrawStatus::Failed;
        return Ok(());
    }
    let ex = exactness(job, &original, &normal, None)?;
    report.exactness = Some(ex);
    if !ex.exact() {
        report.status = DrawStatus::Unstable;
        return Ok(());
    }
    let a = job.analysis.as_ref().ok_or_else(|| Error::Job("draw without analysis settings".into()))?;
    let field = a.scan_field()?;
    let tau = field.parse_elem(&a.tau)?;
    let scan = cross_check(&original, &normal, &field, &tau, a.budget, ScanSource::Completed)?;
    report.status = if scan.passed() { DrawStatus::Passed } else { DrawStatus::Failed };
    report.scan = Some(scan);
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Tally {
    pub obstructed: usize,
    pub passed: usize,
    pub unstable: usize,
    pub degenerate: usize,
    pub over_budget: usize,
    pub failed: usize,
    /// Flat draws whose normal form was checked.
    pub normal_forms: usize,
    pub scanned_points: usize,
    pub singular_points: usize,
    pub disagreements: usize,
    pub semicontinuity_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FuzzReport {
    pub tool_version: &'static str,
    pub seed: u64,
    pub count: u64,
    pub bounds: FuzzBounds,
    pub tally: Tally,
    /// Full reports of failed draws, each replayable from its job.
    pub failures: Vec<DrawReport>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.tally.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

pub fn tally(reports: &[DrawReport]) -> Tally {
    let mut t = Tally::default();
    for r in reports {
        match r.status {
            DrawStatus::Obstructed => t.obstructed += 1,
            DrawStatus::Passed => t.passed += 1,
            DrawStatus::Unstable => t.unstable += 1,
            DrawStatus::Degenerate => t.degenerate += 1,
            DrawStatus::OverBudget => t.over_budget += 1,
            DrawStatus::Failed => t.failed += 1,
        }
        if r.normal_form.is_some() {
            t.normal_forms += 1;
        }
        if let Some(s) = &r.scan {
            t.scanned_points += s.points;
            t.singular_points += s.singular.len();
            t.disagreements += s.disagreements.len();
            t.semicontinuity_violations += s.semicontinuity.counterexamples.len();
        }
    }
    t
}

/// Evaluate draws `0..count` in parallel; the report depends only on
/// `(bounds, seed, count)`.
pub fn run_campaign(bounds: &FuzzBounds, seed: u64, count: u64) -> Result<(FuzzReport, Vec<DrawReport>)> {
    bounds.check()?;
    let jobs = (0..count).map(|i| draw(bounds, seed, i)).collect::<Result<Vec<_>>>()?;
    let reports: Vec<DrawReport> =
        jobs.par_iter().enumerate().map(|(i, job)| evaluate(i as u64, job)).collect();
    let report = FuzzReport {
        tool_version: VERSION,
        seed,
        count,
        bounds: bounds.clone(),
        tally: tally(&reports),
        failures: reports.iter().filter(|r| r.status == DrawStatus::Failed).cloned().collect(),
    };
    Ok((report, reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds() -> FuzzBounds {
        FuzzBounds::new(DvrSpec::equal_char_zero(3).unwrap())
    }

    #[test]
    fn draws_are_deterministic() {
        let b = bounds();
        for i in 0..20 {
            assert_eq!(draw(&b, 7, i).unwrap(), draw(&b, 7, i).unwrap());
        }
        assert_ne!(draw(&b, 7, 0).unwrap(), draw(&b, 8, 0).unwrap());
    }

    #[test]
    fn empty_campaign() {
        let (r, all) = run_campaign(&bounds(), 1, 0).unwrap();
        assert!(all.is_empty());
        assert!(r.passed());
        assert_eq!(r.tally, Tally::default());
    }

    #[test]
    fn small_campaign_passes_and_repeats() {
        let (a, _) = run_campaign(&bounds(), 3, 12).unwrap();
        let (b, _) = run_campaign(&bounds(), 3, 12).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.passed(), "{}", a.to_json());
    }
}
