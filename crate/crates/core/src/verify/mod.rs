//! Checks for reliability, cache leaks, side-information accounting and
//! privacy, each producing a serializable [`PrivacyReport`].

mod statistical;

pub use statistical::{
    transcript_cells, verify_statistical_privacy, Randomizer, StatisticalOptions, View, DEFAULT_BUDGET,
    DEFAULT_TV_THRESHOLD,
};

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{PirParams, Scheme};
use crate::plan::{self, structural_audit, sub_seed, BitRef, EquationKind, QueryPlan};
use crate::sim::{self, MessageStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Reliability,
    Leak,
    Consumption,
    Structural,
    Statistical,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Mode::Reliability => "reliability",
            Mode::Leak => "leak",
            Mode::Consumption => "consumption",
            Mode::Structural => "structural",
            Mode::Statistical => "statistical",
        };
        f.write_str(s)
    }
}

/// What one database contributed to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbDetail {
    pub database: u32,
    pub pass: bool,
    /// Offending equations, bits or mismatching tables.
    pub violations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub mode: Mode,
    pub pass: bool,
    pub details: Vec<DbDetail>,
    /// Largest pairwise total-variation distance (statistical mode).
    pub tv_distance: Option<f64>,
    /// Sessions or transcripts examined.
    pub samples: u64,
    pub notes: Vec<String>,
}

impl PrivacyReport {
    fn from_details(mode: Mode, details: Vec<DbDetail>, samples: u64, notes: Vec<String>) -> Self {
        let pass = details.iter().all(|d| d.pass) && notes.is_empty();
        PrivacyReport { mode, pass, details, tv_distance: None, samples, notes }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }
}

fn detail(database: u32, violations: u64) -> DbDetail {
    DbDetail { database, pass: violations == 0, violations, tv_distance: None }
}

/// Runs `trials` sessions for every target at corner `s` (0 for the
/// classical plan); session `i` uses seed `seed + i`.
pub fn verify_reliability(k: u32, n: u32, s: u32, trials: u64, seed: u64) -> Result<PrivacyReport> {
    reliability(k, n, s, trials, seed, None)
}

/// Same sessions, but every database receives `tamper(plan)` while the user
/// decodes against the intended plan.
pub fn verify_reliability_tampered(
    k: u32,
    n: u32,
    s: u32,
    trials: u64,
    seed: u64,
    tamper: &(dyn Fn(&QueryPlan) -> QueryPlan + Sync),
) -> Result<PrivacyReport> {
    reliability(k, n, s, trials, seed, Some(tamper))
}

/// Drops the last term of the first equation sent to database 1.
pub fn drop_one_term(plan: &QueryPlan) -> QueryPlan {
    let mut out = plan.clone();
    if let Some(eq) = out.rounds.iter_mut().filter(|b| b.database == 1).flat_map(|b| b.equations.iter_mut()).next() {
        eq.terms.pop();
    }
    out
}

fn reliability(
    k: u32,
    n: u32,
    s: u32,
    trials: u64,
    seed: u64,
    tamper: Option<&(dyn Fn(&QueryPlan) -> QueryPlan + Sync)>,
) -> Result<PrivacyReport> {
    let params = PirParams::with_corner(k, n, s)?;
    let jobs: Vec<(u32, u64)> = (1..=k).flat_map(|theta| (0..trials).map(move |i| (theta, i))).collect();
    let failures: Vec<String> = jobs
        .par_iter()
        .filter_map(|&(theta, i)| {
            let session_seed = seed.wrapping_add(i);
            let outcome = match tamper {
                None => sim::run_session(&params, theta, session_seed).map(|r| r.decode_ok),
                Some(f) => plan::plan_for(&params, theta, session_seed).and_then(|plan| {
                    let store = MessageStore::random(k, plan.message_length, sub_seed(session_seed, 2));
                    sim::execute(&store, &plan, &f(&plan)).map(|e| e.decode_ok)
                }),
            };
            match outcome {
                Ok(true) => None,
                Ok(false) => Some(format!("theta={theta} seed={session_seed}: wrong bits decoded")),
                Err(e) => Some(format!("theta={theta} seed={session_seed}: {e}")),
            }
        })
        .collect();
    let mut notes = failures;
    let total = notes.len();
    notes.truncate(10);
    if total > notes.len() {
        notes.push(format!("{} more failures", total - notes.len()));
    }
    Ok(PrivacyReport::from_details(Mode::Reliability, Vec::new(), jobs.len() as u64, notes))
}

/// No equation sent to database `n` touches a bit the user cached from `n`.
pub fn verify_no_local_leak(plan: &QueryPlan) -> PrivacyReport {
    let details = (1..=plan.num_databases())
        .map(|db| {
            let leaks = plan
                .equations_for(db)
                .filter(|eq| eq.terms.iter().any(|b| plan.cache.contains(db, b)))
                .count();
            detail(db, leaks as u64)
        })
        .collect();
    PrivacyReport::from_details(Mode::Leak, details, plan.total_equations() as u64, Vec::new())
}

/// Side-information accounting for a corner (or classical) plan:
///
/// * every cached undesired bit sits in exactly one first-round equation at
///   each database other than its source, and in none at the source;
/// * every undesired equation of round `t-1` is consumed exactly once in
///   round `t` at each database other than the one that answered it;
/// * the desired message's cached bits are never used, and the fresh
///   desired bits number `L - N·c`, each downloaded once.
pub fn verify_consumption(plan: &QueryPlan) -> Result<PrivacyReport> {
    let s = match plan.scheme {
        Scheme::Corner { s } => s,
        Scheme::Classical => 0,
        _ => return Err(Error::InvalidParams("consumption accounting needs a corner or classical plan".into())),
    };
    let (n, theta) = (plan.num_databases(), plan.target);
    let mut violations = vec![0u64; n as usize];
    let mut notes = Vec::new();

    // (a) cached bits in round s+1.
    let mut uses: HashMap<(BitRef, u32), u32> = HashMap::new();
    for eq in plan.equations().filter(|e| e.round == s + 1 && e.kind == EquationKind::DesiredBearing) {
        for b in eq.side_terms(theta) {
            if !plan.cache.is_cached(&b) {
                violations[eq.database as usize - 1] += 1;
            }
            *uses.entry((b, eq.database)).or_default() += 1;
        }
    }
    if s > 0 {
        for src in 1..=n {
            for b in plan.cache.db_bits(src).filter(|b| b.message != theta) {
                for db in 1..=n {
                    let want = u32::from(db != src);
                    if uses.get(&(b, db)).copied().unwrap_or(0) != want {
                        violations[db as usize - 1] += 1;
                    }
                }
            }
        }
    }

    // (b) downloaded side information in rounds t > s+1.
    let mut produced: HashMap<&[BitRef], (u32, u32)> = HashMap::new();
    for eq in plan.equations().filter(|e| e.kind == EquationKind::Undesired) {
        produced.insert(&eq.terms, (eq.database, eq.round));
    }
    let mut consumed: HashMap<(Vec<BitRef>, u32), u32> = HashMap::new();
    for eq in plan.equations().filter(|e| e.round > s + 1 && e.kind == EquationKind::DesiredBearing) {
        let side = eq.side_terms(theta);
        match produced.get(side.as_slice()) {
            Some(&(src, round)) if src != eq.database && round + 1 == eq.round => {
                *consumed.entry((side, eq.database)).or_default() += 1;
            }
            _ => violations[eq.database as usize - 1] += 1,
        }
    }
    for eq in plan.equations().filter(|e| e.kind == EquationKind::Undesired && e.round < plan.num_messages()) {
        for db in (1..=n).filter(|&db| db != eq.database) {
            if consumed.get(&(eq.terms.clone(), db)).copied().unwrap_or(0) != 1 {
                violations[db as usize - 1] += 1;
            }
        }
    }

    // (c) desired bits.
    let mut fresh: HashMap<u32, u32> = HashMap::new();
    for eq in plan.equations().filter(|e| e.kind == EquationKind::DesiredBearing) {
        let bit = eq.term_of(theta).expect("desired-bearing");
        if plan.cache.is_cached(&bit) {
            violations[eq.database as usize - 1] += 1;
        }
        *fresh.entry(bit.index).or_default() += 1;
        if eq.side_terms(theta).iter().any(|b| b.message == theta) {
            violations[eq.database as usize - 1] += 1;
        }
    }
    let expected = plan.message_length as usize - plan.cache.total_cached(theta);
    if fresh.len() != expected || fresh.values().any(|&c| c != 1) {
        notes.push(format!("{} distinct desired bits downloaded, expected {expected} each once", fresh.len()));
    }

    let details = (1..=n).map(|db| detail(db, violations[db as usize - 1])).collect();
    Ok(PrivacyReport::from_details(Mode::Consumption, details, plan.total_equations() as u64, notes))
}

/// Audit tables agree across every target message and each is message
/// symmetric.
pub fn verify_structural_privacy(k: u32, n: u32, s: u32) -> Result<PrivacyReport> {
    PirParams::with_corner(k, n, s)?;
    let plans = (1..=k).map(|theta| plan::canonical_corner(k, n, s, theta)).collect::<Result<Vec<_>>>()?;
    Ok(verify_structural_privacy_of(&plans))
}

/// Structural check over arbitrary plans (one per target).
pub fn verify_structural_privacy_of(plans: &[QueryPlan]) -> PrivacyReport {
    let audits: Vec<_> = plans.iter().map(structural_audit).collect();
    let n = plans.first().map_or(0, |p| p.num_databases());
    let details = (1..=n)
        .map(|db| {
            let base = audits[0].db(db);
            let mismatched = audits.iter().filter(|a| a.db(db) != base).count();
            let asymmetric = audits.iter().filter(|a| !a.db(db).is_message_symmetric()).count();
            detail(db, (mismatched + asymmetric) as u64)
        })
        .collect();
    PrivacyReport::from_details(Mode::Structural, details, plans.len() as u64, Vec::new())
}
