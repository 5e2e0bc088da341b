//! Orchestration of every check over the levels of a pool, with stable,
//! serializable reports.

use std::collections::BTreeMap;
use std::time::Instant;

use kolyrec_linalg::{LeftSolver, ModRow};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::context::{norm_identity_check, Context, Fraction, Level};
use crate::distribution::{
    embed_u, euler_relations_check, frob_regularity_check, i_ell_check, reduction_sequence_check,
    relations_stable_check,
};
use crate::doublecomplex::{
    basis_corollary_check, canonical_basis_check, canonical_recursion_check, differential_identity_check,
    epsilon_check, h0_comparison_check, s_mask_check, shift_equals_d_check, shift_identity_check,
    transition_matrix,
};
use crate::kolyvagin::{
    d_ell_consistency_check, h0_dimension_check, iterated_recursion_check, recursion_check_universal,
    universal_kolyvagin_class, H0Class,
};
use crate::resolution::{cohomology_of_l, sigma_sequence_check};
use crate::{CoreError, Engine, Outcome};

/// What a check iterates over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scope {
    Prime,
    Level,
    LevelPrime,
}

struct CheckSpec {
    name: &'static str,
    anchor: &'static str,
    scope: Scope,
}

const CHECKS: &[CheckSpec] = &[
    CheckSpec { name: "norm_identity", anchor: "norm identity N'_l (sigma_l - 1) = l - 1 - N_l", scope: Scope::Prime },
    CheckSpec { name: "u_structure", anchor: "U_r free of rank phi(r), embeddings with free cokernel", scope: Scope::Level },
    CheckSpec { name: "i_ell", anchor: "the subgroup I_l and (sigma_l - 1) U_r inside it", scope: Scope::LevelPrime },
    CheckSpec { name: "euler_relations", anchor: "universal Euler system relations", scope: Scope::LevelPrime },
    CheckSpec { name: "frob_regularity", anchor: "l - Frob_l is injective on U_r'", scope: Scope::LevelPrime },
    CheckSpec { name: "reduction_sequence", anchor: "exact reduction sequence for U_r / I_l", scope: Scope::LevelPrime },
    CheckSpec { name: "l_cohomology", anchor: "resolution L(r) of U_r", scope: Scope::Level },
    CheckSpec { name: "sigma_sequence", anchor: "contraction s_l and the sequence for L / L'", scope: Scope::LevelPrime },
    CheckSpec { name: "h0_dimension", anchor: "dim H^0(G_r, U_r/M) = 2^omega(r)", scope: Scope::Level },
    CheckSpec { name: "recursion", anchor: "universal Kolyvagin recursion D_l c_r = c_r/l", scope: Scope::Level },
    CheckSpec { name: "d_consistency", anchor: "D_l well defined and linear", scope: Scope::LevelPrime },
    CheckSpec { name: "k_identities", anchor: "anticommuting differentials of K(r)", scope: Scope::Level },
    CheckSpec { name: "epsilon", anchor: "epsilon twist and conjugation signs", scope: Scope::Level },
    CheckSpec { name: "s_mask", anchor: "subcomplex S and dK + delta K in S + MK", scope: Scope::Level },
    CheckSpec { name: "h0_of_k", anchor: "H^0(K(r)/M) = H^0(G_r, U_r/M)", scope: Scope::Level },
    CheckSpec { name: "canonical_basis", anchor: "canonical basis c-bar_g and its recursion", scope: Scope::Level },
    CheckSpec { name: "delta_identities", anchor: "diagonal shift Delta_l identities", scope: Scope::Level },
    CheckSpec { name: "shift_equals_d", anchor: "Delta_l induces D_l", scope: Scope::LevelPrime },
    CheckSpec { name: "basis_corollary", anchor: "universal classes c_g form a basis", scope: Scope::Level },
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    #[serde(rename = "M")]
    pub modulus: u64,
    pub primes: Vec<u64>,
    #[serde(default)]
    pub roots: BTreeMap<u64, u64>,
    pub max_omega: usize,
    /// Check names; empty means all.
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub timings: bool,
}

impl SuiteConfig {
    pub fn new(modulus: u64, primes: &[u64]) -> Self {
        Self {
            modulus,
            primes: primes.to_vec(),
            roots: BTreeMap::new(),
            max_omega: primes.len(),
            checks: Vec::new(),
            timings: false,
        }
    }

    /// Validates the pool and builds its context.
    pub fn context(&self) -> Result<Context, CoreError> {
        if self.max_omega > self.primes.len() {
            return Err(CoreError::InvalidLevel(format!(
                "max_omega {} exceeds the pool size {}",
                self.max_omega,
                self.primes.len()
            )));
        }
        for name in &self.checks {
            if name != "all" && !CHECKS.iter().any(|c| c.name == name) {
                return Err(CoreError::InvalidLevel(format!("unknown check {name}")));
            }
        }
        Context::new(self.modulus, &self.primes, &self.roots)
    }

    fn selected(&self, name: &str) -> bool {
        self.checks.is_empty() || self.checks.iter().any(|c| c == "all" || c == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Params {
    #[serde(rename = "M")]
    pub modulus: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub g: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub anchor: String,
    pub params: Params,
    pub verdict: Verdict,
    pub details: Value,
    /// Wall time, recorded only on request so reports stay byte-identical.
    pub millis: Option<u64>,
    #[serde(skip)]
    pub internal: bool,
}

impl CheckReport {
    pub fn failures(&self) -> Vec<String> {
        self.details
            .get("failures")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(|v| v.as_str().map(String::from)).collect())
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub exit_code: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub context: Value,
    pub reports: Vec<CheckReport>,
    pub summary: Summary,
}

impl SuiteReport {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }
}

pub fn context_json(ctx: &Context) -> Value {
    json!({
        "M": ctx.modulus(),
        "primes": ctx.primes(),
        "roots": ctx.roots(),
    })
}

fn run_one(engine: &Engine, name: &str, level: Level, l: Option<u64>) -> Result<Outcome, CoreError> {
    let ctx = engine.ctx();
    let l_or = || l.ok_or_else(|| CoreError::Contradiction(format!("{name} needs a prime")));
    match name {
        "norm_identity" => {
            let mut out = Outcome::new();
            out.require("N'_l (sigma_l - 1) = l - 1 - N_l", norm_identity_check(ctx, l_or()?)?);
            Ok(out)
        }
        "u_structure" => {
            let mut out = engine.u(level).structure_check(ctx);
            for p in level.primes(ctx) {
                out.absorb(&format!("embed_from_{}", level.value() / p), embed_u(engine, level.without(ctx, p)?, level)?);
            }
            out.absorb("relations_stable", relations_stable_check(engine, level)?);
            Ok(out)
        }
        "i_ell" => i_ell_check(engine, level, l_or()?),
        "euler_relations" => euler_relations_check(engine, level, l_or()?),
        "frob_regularity" => frob_regularity_check(engine, level.without(ctx, l_or()?)?, l_or()?),
        "reduction_sequence" => reduction_sequence_check(engine, level, l_or()?),
        "l_cohomology" => cohomology_of_l(engine, level),
        "sigma_sequence" => sigma_sequence_check(engine, level, l_or()?),
        "h0_dimension" => h0_dimension_check(engine, level),
        "recursion" => {
            let mut out = recursion_check_universal(engine, level)?;
            out.absorb("iterated", iterated_recursion_check(engine, level)?);
            Ok(out)
        }
        "d_consistency" => d_ell_consistency_check(engine, level, l_or()?),
        "k_identities" => Ok(differential_identity_check(engine.window(level)?.as_ref())),
        "epsilon" => Ok(epsilon_check(engine.window(level)?.as_ref())),
        "s_mask" => Ok(s_mask_check(engine.window(level)?.as_ref())),
        "h0_of_k" => h0_comparison_check(engine, level),
        "canonical_basis" => {
            let mut out = canonical_basis_check(engine, level)?;
            out.absorb("recursion", canonical_recursion_check(engine, level)?);
            Ok(out)
        }
        "delta_identities" => Ok(shift_identity_check(engine.window(level)?.as_ref())),
        "shift_equals_d" => shift_equals_d_check(engine, level, l_or()?),
        "basis_corollary" => basis_corollary_check(engine, level),
        _ => Err(CoreError::Contradiction(format!("unknown check {name}"))),
    }
}

fn report(spec: &CheckSpec, params: Params, result: Result<Outcome, CoreError>, millis: Option<u64>) -> CheckReport {
    let (verdict, details, internal) = match result {
        Ok(out) => {
            let verdict = if out.passed() { Verdict::Pass } else { Verdict::Fail };
            let (failures, mut details) = out.into_parts();
            details.insert("failures".into(), json!(failures));
            (verdict, Value::Object(details), false)
        }
        Err(e) => {
            let mut details = Map::new();
            details.insert("error".into(), json!(e.to_string()));
            details.insert("internal".into(), json!(e.is_internal()));
            (Verdict::Error, Value::Object(details), e.is_internal())
        }
    };
    CheckReport {
        name: spec.name.to_string(),
        anchor: spec.anchor.to_string(),
        params,
        verdict,
        details,
        millis,
        internal,
    }
}

/// Runs the selected checks on every level with `omega(r) <= max_omega`.
///
/// Configuration problems are returned as errors; everything else becomes a report.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport, CoreError> {
    let ctx = config.context()?;
    let m = ctx.modulus();
    let levels = ctx.all_levels(config.max_omega);
    let engine = Engine::new(ctx.clone());
    let mut reports = Vec::new();
    for spec in CHECKS.iter().filter(|s| config.selected(s.name)) {
        let mut jobs: Vec<(Level, Option<u64>)> = Vec::new();
        match spec.scope {
            Scope::Prime => jobs.extend(ctx.primes().iter().map(|&l| (Level::one(), Some(l)))),
            Scope::Level => jobs.extend(levels.iter().map(|&r| (r, None))),
            Scope::LevelPrime => {
                for &r in &levels {
                    jobs.extend(r.primes(&ctx).into_iter().map(|l| (r, Some(l))));
                }
            }
        }
        for (level, l) in jobs {
            let start = Instant::now();
            let result = run_one(&engine, spec.name, level, l);
            let millis = config.timings.then(|| start.elapsed().as_millis() as u64);
            let r = match spec.scope {
                Scope::Prime => None,
                _ if spec.name == "frob_regularity" => Some(level.value() / l.unwrap_or(1)),
                _ => Some(level.value()),
            };
            let params = Params { modulus: m, r, l, g: None };
            reports.push(report(spec, params, result, millis));
        }
    }
    reports.sort_by(|a, b| (&a.name, &a.params).cmp(&(&b.name, &b.params)));
    let passed = reports.iter().filter(|r| r.verdict == Verdict::Pass).count();
    let failed = reports.iter().filter(|r| r.verdict == Verdict::Fail).count();
    let errors = reports.iter().filter(|r| r.verdict == Verdict::Error).count();
    let exit_code = if reports.iter().any(|r| r.internal) {
        3
    } else if failed + errors > 0 {
        1
    } else {
        0
    };
    Ok(SuiteReport {
        config: config.clone(),
        context: context_json(&ctx),
        summary: Summary { total: reports.len(), passed, failed, errors, exit_code },
        reports,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Universal,
    Canonical,
}

/// A class with its reduced representative and coordinates in the canonical basis.
#[derive(Clone, Debug, Serialize)]
pub struct ClassView {
    pub kind: ClassKind,
    #[serde(rename = "M")]
    pub modulus: u64,
    pub r: u64,
    pub representative: Vec<(String, u64)>,
    /// Divisors `g`, in the order of `canonical_coordinates`.
    pub basis: Vec<u64>,
    pub canonical_coordinates: Vec<u64>,
}

impl ClassView {
    /// One `[a] : c` line per term.
    pub fn lines(&self) -> Vec<String> {
        self.representative.iter().map(|(a, c)| format!("[{a}] : {c}")).collect()
    }
}

fn ordered_divisors(ctx: &Context, level: Level) -> Vec<Level> {
    let mut ds = level.divisors(ctx);
    ds.sort_by_key(|g| (g.omega(), g.value()));
    ds
}

pub fn show_class(engine: &Engine, kind: ClassKind, r: u64) -> Result<ClassView, CoreError> {
    let ctx = engine.ctx();
    let m = ctx.modulus();
    let level = ctx.level_of(r)?;
    let class: H0Class = match kind {
        ClassKind::Universal => universal_kolyvagin_class(engine, level)?,
        ClassKind::Canonical => engine
            .canonical_basis(level)?
            .get(level)
            .map(|e| e.class.clone())
            .ok_or_else(|| CoreError::Contradiction("canonical basis incomplete".into()))?,
    };
    let divisors = ordered_divisors(ctx, level);
    let basis = engine.canonical_basis(level)?;
    let rows: Vec<ModRow> = divisors
        .iter()
        .map(|g| basis.get(*g).map(|e| e.class.coords.clone()))
        .collect::<Option<_>>()
        .ok_or_else(|| CoreError::Contradiction("canonical basis incomplete".into()))?;
    let solver = LeftSolver::new(m, &rows, engine.h0(level)?.ncoords());
    let t = solver
        .solve(&class.coords)
        .ok_or_else(|| CoreError::Contradiction(format!("class at {r} outside the canonical span")))?;
    let mut coords = vec![0u64; divisors.len()];
    for (j, v) in t {
        coords[j] = v;
    }
    let representative = class
        .reduced_chain(m)
        .into_iter()
        .map(|(a, c): (Fraction, _)| (a.to_string(), c.to_u64().unwrap_or(0)))
        .collect();
    Ok(ClassView {
        kind,
        modulus: m,
        r,
        representative,
        basis: divisors.iter().map(|g| g.value()).collect(),
        canonical_coordinates: coords,
    })
}

/// Transition matrix from the canonical basis to `{c_g}` at level `r`, rows `c_g`.
pub fn basis_table(engine: &Engine, r: u64) -> Result<(Vec<u64>, Vec<Vec<u64>>), CoreError> {
    let level = engine.ctx().level_of(r)?;
    let t = transition_matrix(engine, level)?
        .ok_or_else(|| CoreError::Contradiction(format!("universal classes at {r} outside the canonical span")))?;
    Ok((t.divisors.iter().map(|g| g.value()).collect(), t.matrix))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_errors() {
        assert!(run_suite(&SuiteConfig::new(3, &[5])).is_err());
        let mut c = SuiteConfig::new(3, &[7]);
        c.max_omega = 2;
        assert!(run_suite(&c).is_err());
        let mut c = SuiteConfig::new(3, &[7]);
        c.checks = vec!["nope".into()];
        assert!(run_suite(&c).is_err());
    }

    #[test]
    fn small_suite_passes_and_is_sorted() {
        let report = run_suite(&SuiteConfig::new(3, &[7, 13])).unwrap();
        let failing: Vec<_> = report
            .reports
            .iter()
            .filter(|r| r.verdict != Verdict::Pass)
            .map(|r| (r.name.clone(), r.params.clone(), r.details.clone()))
            .collect();
        assert!(failing.is_empty(), "{failing:?}");
        assert_eq!(report.exit_code(), 0);
        let keys: Vec<_> = report.reports.iter().map(|r| (r.name.clone(), r.params.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(report.reports.iter().all(|r| !r.anchor.is_empty() && r.millis.is_none()));
    }

    #[test]
    fn class_views() {
        let e = Engine::new(Context::with_default_roots(3, &[7, 13]).unwrap());
        let v = show_class(&e, ClassKind::Universal, 1).unwrap();
        assert_eq!(v.lines(), vec!["[0] : 1"]);
        let v = show_class(&e, ClassKind::Universal, 7).unwrap();
        let terms: BTreeMap<String, u64> = v.representative.into_iter().collect();
        let expected: BTreeMap<String, u64> =
            [("2/7", 2), ("3/7", 1), ("4/7", 1), ("5/7", 2)].map(|(a, c)| (a.to_string(), c)).into();
        assert_eq!(terms, expected);
        let v = show_class(&e, ClassKind::Canonical, 7).unwrap();
        assert_eq!(v.basis, vec![1, 7]);
        assert_eq!(v.canonical_coordinates, vec![0, 1]);
    }
}
