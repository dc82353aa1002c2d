//! Turns ranked link predictions into a pricing flight subset.
//!
//! The endpoints of the highest-scoring non-edges are taken first, up to a
//! budget discounted by the model's ROC score; the rest of the subset is a
//! uniform random draw from the remaining flights. Pricing then runs over
//! the subset.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::DualVector;
use crate::pairing::{PairingEngine, PricedPairing, PricingError, PricingRequest};
use crate::vgae::PredictionSet;

#[derive(Debug, Error, PartialEq)]
pub enum CombinerError {
    #[error("subset size {param1} must be positive and below half of {flights} flights")]
    SubsetSize { param1: usize, flights: usize },
    #[error("no flights to choose from")]
    NoFlights,
    #[error("roc score {0} outside [0, 1]")]
    BadRoc(f64),
    #[error("predicted pair ({0}, {1}) names an unknown flight")]
    UnknownFlight(usize, usize),
    #[error(transparent)]
    Pricing(#[from] PricingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinerConfig {
    pub param1: usize,
    pub seed: u64,
}

impl CombinerConfig {
    pub fn validate(&self, num_flights: usize) -> Result<(), CombinerError> {
        if num_flights == 0 {
            return Err(CombinerError::NoFlights);
        }
        if self.param1 == 0 || 2 * self.param1 >= num_flights {
            return Err(CombinerError::SubsetSize {
                param1: self.param1,
                flights: num_flights,
            });
        }
        Ok(())
    }
}

/// Which flights were picked and why.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Selection {
    /// Learnt flights in the order they were added.
    pub learnt: Vec<usize>,
    /// Random fill, ascending.
    pub random: Vec<usize>,
    /// Number of ranked pairs walked.
    pub pairs_consumed: usize,
    /// The pairs walked, in rank order.
    pub chosen_pairs: Vec<(usize, usize)>,
}

impl Selection {
    /// All selected flights, ascending.
    pub fn flights(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.learnt.iter().chain(&self.random).copied().collect();
        f.sort_unstable();
        f
    }

    pub fn learnt_count(&self) -> usize {
        self.learnt.len()
    }

    pub fn random_count(&self) -> usize {
        self.random.len()
    }
}

/// `floor(param1 * roc)`.
pub fn learnt_budget(param1: usize, roc: f64) -> usize {
    (param1 as f64 * roc).floor() as usize
}

/// Picks the pricing subset from ranked predictions over flights `0..num_flights`.
pub fn select_flights(
    predictions: &PredictionSet,
    roc: f64,
    num_flights: usize,
    config: &CombinerConfig,
) -> Result<Selection, CombinerError> {
    config.validate(num_flights)?;
    if !(0.0..=1.0).contains(&roc) {
        return Err(CombinerError::BadRoc(roc));
    }
    let mut ranked = predictions.pairs.clone();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let cap = learnt_budget(config.param1, roc);
    let mut taken = vec![false; num_flights];
    let mut sel = Selection::default();
    for &((i, j), _) in &ranked {
        if sel.learnt.len() >= cap {
            break;
        }
        if i >= num_flights || j >= num_flights {
            return Err(CombinerError::UnknownFlight(i, j));
        }
        sel.pairs_consumed += 1;
        sel.chosen_pairs.push((i, j));
        for f in [i, j] {
            if !taken[f] && sel.learnt.len() < cap {
                taken[f] = true;
                sel.learnt.push(f);
            }
        }
    }

    let gamma = config.param1 - sel.learnt.len();
    let rest: Vec<usize> = (0..num_flights).filter(|&f| !taken[f]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut random: Vec<usize> = rand::seq::index::sample(&mut rng, rest.len(), gamma.min(rest.len()))
        .into_iter()
        .map(|k| rest[k])
        .collect();
    random.sort_unstable();
    sel.random = random;
    Ok(sel)
}

#[derive(Debug, Clone)]
pub struct CombineOutcome {
    pub selection: Selection,
    pub pairings: Vec<PricedPairing>,
}

impl CombineOutcome {
    pub fn flight_subset(&self) -> Vec<usize> {
        self.selection.flights()
    }
}

/// Selects the subset and prices it against `duals`.
pub fn combine(
    engine: &PairingEngine<'_>,
    predictions: &PredictionSet,
    roc: f64,
    duals: &DualVector,
    config: &CombinerConfig,
    max_columns: usize,
) -> Result<CombineOutcome, CombinerError> {
    let selection = select_flights(predictions, roc, engine.network().len(), config)?;
    let request = PricingRequest::new(selection.flights(), duals.clone(), max_columns);
    let pairings = engine.price(&request)?;
    Ok(CombineOutcome { selection, pairings })
}
