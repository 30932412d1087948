use serde::{Deserialize, Serialize};

use crate::marketdata::VolumeAtPrice;

use super::{fit, FitFamily, FitOptions, FitResult};

/// One rung of the ladder: either a fit or the reason it could not be made.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderAttempt {
    pub family: FitFamily,
    pub result: Option<FitResult>,
    pub error: Option<String>,
}

impl LadderAttempt {
    pub fn significant(&self) -> bool {
        self.result.as_ref().is_some_and(|r| r.significant)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub attempts: Vec<LadderAttempt>,
    /// Index into `attempts` of the first significant fit.
    pub chosen: Option<usize>,
}

impl LadderReport {
    pub fn chosen_result(&self) -> Option<&FitResult> {
        self.chosen.and_then(|i| self.attempts[i].result.as_ref())
    }

    /// Last fitted attempt, significant or not.
    pub fn last_result(&self) -> Option<&FitResult> {
        self.attempts.iter().rev().find_map(|a| a.result.as_ref())
    }
}

/// The fixed family order: single Bessel, superposition with one then two
/// eigenvalues, then Kummer of the configured order.
pub fn ladder_families(options: &FitOptions) -> [FitFamily; 4] {
    [
        FitFamily::Bessel,
        FitFamily::SuperpositionShared,
        FitFamily::SuperpositionDistinct,
        FitFamily::Kummer { order: options.kummer_order },
    ]
}

/// Fits families in ladder order until one is significant.
pub fn run_ladder(dist: &VolumeAtPrice, options: &FitOptions) -> LadderReport {
    let mut attempts = Vec::new();
    let mut chosen = None;
    for family in ladder_families(options) {
        let attempt = match fit(dist, family, None, options) {
            Ok(r) => LadderAttempt { family, result: Some(r), error: None },
            Err(e) => LadderAttempt { family, result: None, error: Some(e.to_string()) },
        };
        let done = attempt.significant();
        attempts.push(attempt);
        if done {
            chosen = Some(attempts.len() - 1);
            break;
        }
    }
    LadderReport { attempts, chosen }
}
