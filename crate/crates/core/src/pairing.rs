//! Duty and pairing enumeration over a flight subset, and pricing.
//!
//! Duties are grown depth-first along sit connections; pairings chain duties
//! along rest connections from a crew base back to the same base. Pricing
//! enumerates every pairing over the subset and keeps those with negative
//! reduced cost.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::lp::DualVector;
use crate::network::{CostRules, CrewBase, Duty, FlightNetwork, LegalityRules, Pairing};

pub const DEFAULT_REDUCED_COST_TOLERANCE: f64 = -1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum PricingError {
    #[error("no dual value for flight {flight} (dual vector has {len} entries)")]
    MissingDual { flight: usize, len: usize },
    #[error("flight {0} in the pricing subset is not part of the network")]
    UnknownFlight(usize),
    #[error("max_columns must be positive")]
    NoColumnBudget,
}

/// `c_p - sum of y_f over the flights f covered by p`.
pub fn reduced_cost(p: &Pairing, duals: &DualVector) -> Result<f64, PricingError> {
    let mut covered = 0.0;
    for f in p.flights() {
        covered += duals.get(f).ok_or(PricingError::MissingDual {
            flight: f,
            len: duals.len(),
        })?;
    }
    Ok(p.cost() - covered)
}

#[derive(Debug, Clone)]
pub struct PricingRequest {
    pub flight_subset: Vec<usize>,
    pub duals: DualVector,
    pub max_columns: usize,
    pub reduced_cost_tolerance: f64,
}

impl PricingRequest {
    pub fn new(flight_subset: Vec<usize>, duals: DualVector, max_columns: usize) -> Self {
        Self {
            flight_subset,
            duals,
            max_columns,
            reduced_cost_tolerance: DEFAULT_REDUCED_COST_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricedPairing {
    pub pairing: Pairing,
    pub reduced_cost: f64,
}

/// Result of a possibly truncated pairing enumeration.
#[derive(Debug, Clone)]
pub struct Enumeration {
    /// Sorted by flight sequence.
    pub pairings: Vec<Pairing>,
    /// `false` if the limit cut the enumeration short.
    pub complete: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct PairingEngine<'a> {
    network: &'a FlightNetwork,
    rules: LegalityRules,
    costs: CostRules,
}

impl<'a> PairingEngine<'a> {
    pub fn new(network: &'a FlightNetwork, rules: LegalityRules, costs: CostRules) -> Self {
        Self { network, rules, costs }
    }

    pub fn network(&self) -> &'a FlightNetwork {
        self.network
    }

    pub fn rules(&self) -> &LegalityRules {
        &self.rules
    }

    pub fn costs(&self) -> &CostRules {
        &self.costs
    }

    fn mask(&self, subset: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.network.len()];
        for &f in subset {
            if f < mask.len() {
                mask[f] = true;
            }
        }
        mask
    }

    /// Every legal duty whose flights all lie in `subset`, in lexicographic
    /// order of flight sequence. Ids outside the network are ignored.
    pub fn enumerate_duties(&self, subset: &[usize]) -> Vec<Duty> {
        let mask = self.mask(subset);
        let mut out = Vec::new();
        let mut path = Vec::new();
        for start in 0..self.network.len() {
            if mask[start] {
                path.push(start);
                self.extend_duty(&mask, &mut path, &mut out);
                path.pop();
            }
        }
        out
    }

    fn extend_duty(&self, mask: &[bool], path: &mut Vec<usize>, out: &mut Vec<Duty>) {
        let fl = self.network.flights();
        let r = &self.rules;
        let first = &fl[path[0]];
        let last = &fl[path[path.len() - 1]];
        let flying: i64 = path.iter().map(|&f| fl[f].block_time()).sum();
        if flying > r.duty_max_flying || last.arr_time + r.debrief - (first.dep_time - r.brief) > r.duty_max_elapsed {
            return;
        }
        out.push(Duty::new(self.network, r, path.clone()).expect("ids come from the network"));
        if path.len() == r.duty_max_flights {
            return;
        }
        for next in self
            .network
            .departing_between(last.arr_time + r.sit_min, last.arr_time + r.sit_max)
        {
            if mask[next] && next > last.id && fl[next].origin == last.destination {
                path.push(next);
                self.extend_duty(mask, path, out);
                path.pop();
            }
        }
    }

    pub fn enumerate_pairings(&self, subset: &[usize]) -> Vec<Pairing> {
        self.enumerate_pairings_bounded(subset, usize::MAX).pairings
    }

    /// Every legal pairing over `subset`, stopping after `limit` pairings.
    pub fn enumerate_pairings_bounded(&self, subset: &[usize], limit: usize) -> Enumeration {
        let mut pairings = Vec::new();
        let mut truncated = false;
        self.walk(subset, |base, duties, chain| {
            if pairings.len() >= limit {
                truncated = true;
                return false;
            }
            pairings.push(self.assemble(base, duties, chain));
            true
        });
        pairings.sort_by_cached_key(|p| p.flight_sequence());
        Enumeration {
            pairings,
            complete: !truncated,
        }
    }

    /// Calls `visit` with every legal pairing over `subset` until it
    /// returns `false`. Returns `true` if the enumeration ran to the end.
    pub fn for_each_pairing(&self, subset: &[usize], mut visit: impl FnMut(Pairing) -> bool) -> bool {
        let mut complete = true;
        self.walk(subset, |base, duties, chain| {
            complete = visit(self.assemble(base, duties, chain));
            complete
        });
        complete
    }

    fn assemble(&self, base: CrewBase, duties: &[Duty], chain: &[usize]) -> Pairing {
        let ds = chain.iter().map(|&k| duties[k].clone()).collect();
        Pairing::new(base, ds, &self.costs).expect("chain is non-empty")
    }

    /// Depth-first walk over duty chains that form legal pairings. `visit`
    /// gets the base, the duty table and the chain of duty indices.
    fn walk(&self, subset: &[usize], mut visit: impl FnMut(CrewBase, &[Duty], &[usize]) -> bool) {
        let duties = self.enumerate_duties(subset);
        let mut by_first: Vec<Vec<usize>> = vec![Vec::new(); self.network.len()];
        for (k, d) in duties.iter().enumerate() {
            by_first[d.first_flight()].push(k);
        }
        let mut walk = PairingWalk {
            engine: self,
            duties: &duties,
            by_first: &by_first,
            visit: &mut visit,
            stopped: false,
        };
        let fl = self.network.flights();
        for (k, d) in duties.iter().enumerate() {
            let origin = fl[d.first_flight()].origin;
            if self.network.is_base(origin) {
                walk.extend(CrewBase { airport: origin }, &mut vec![k]);
            }
            if walk.stopped {
                break;
            }
        }
    }

    /// Up to `max_columns` pairings over the subset whose reduced cost is
    /// below the tolerance, cheapest first; ties go to the lexicographically
    /// smaller flight sequence.
    pub fn price(&self, request: &PricingRequest) -> Result<Vec<PricedPairing>, PricingError> {
        self.price_bounded(request, usize::MAX).map(|(p, _)| p)
    }

    /// Like [`price`](Self::price) but gives up after visiting `limit`
    /// pairings; the flag reports whether every pairing was examined.
    pub fn price_bounded(
        &self,
        request: &PricingRequest,
        limit: usize,
    ) -> Result<(Vec<PricedPairing>, bool), PricingError> {
        if request.max_columns == 0 {
            return Err(PricingError::NoColumnBudget);
        }
        let n = self.network.len();
        if let Some(&bad) = request.flight_subset.iter().find(|&&f| f >= n) {
            return Err(PricingError::UnknownFlight(bad));
        }
        if let Some(&f) = request.flight_subset.iter().find(|&&f| f >= request.duals.len()) {
            return Err(PricingError::MissingDual {
                flight: f,
                len: request.duals.len(),
            });
        }
        let y = request.duals.values();
        let c = self.costs;
        let mut best: BinaryHeap<Ranked> = BinaryHeap::new();
        let mut visited = 0usize;
        let mut complete = true;
        let mut failure = None;
        self.walk(&request.flight_subset, |base, duties, chain| {
            if visited >= limit {
                complete = false;
                return false;
            }
            visited += 1;
            let first = &duties[chain[0]];
            let last = &duties[chain[chain.len() - 1]];
            let nd = chain.len() as f64;
            let mut flying = 0;
            let mut covered = 0.0;
            for &k in chain {
                flying += duties[k].flying();
                covered += duties[k].flights().iter().map(|&f| y[f]).sum::<f64>();
            }
            let cost = c.rate_flying * flying as f64
                + c.rate_tafb * (last.end() - first.start()) as f64
                + c.hotel_cost * (nd - 1.0)
                + c.fixed_cost * nd;
            // Cheap screen first, exact value from the assembled pairing.
            if cost - covered >= request.reduced_cost_tolerance + 1e-9 * cost.abs().max(1.0) {
                return true;
            }
            let pairing = self.assemble(base, duties, chain);
            let rc = match reduced_cost(&pairing, &request.duals) {
                Ok(rc) => rc,
                Err(e) => {
                    failure = Some(e);
                    return false;
                }
            };
            if rc < request.reduced_cost_tolerance {
                best.push(Ranked {
                    seq: pairing.flight_sequence(),
                    priced: PricedPairing {
                        pairing,
                        reduced_cost: rc,
                    },
                });
                if best.len() > request.max_columns {
                    best.pop();
                }
            }
            true
        });
        if let Some(e) = failure {
            return Err(e);
        }
        let mut out: Vec<Ranked> = best.into_vec();
        out.sort();
        Ok((out.into_iter().map(|r| r.priced).collect(), complete))
    }
}

/// Orders priced pairings by reduced cost, then flight sequence.
struct Ranked {
    seq: Vec<usize>,
    priced: PricedPairing,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priced
            .reduced_cost
            .total_cmp(&other.priced.reduced_cost)
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

/// Filters and ranks already-enumerated pairings against a dual vector.
pub fn price_pairings(
    pairings: impl IntoIterator<Item = Pairing>,
    duals: &DualVector,
    max_columns: usize,
    tolerance: f64,
) -> Result<Vec<PricedPairing>, PricingError> {
    let mut priced = Vec::new();
    for pairing in pairings {
        let rc = reduced_cost(&pairing, duals)?;
        if rc < tolerance {
            priced.push(PricedPairing {
                pairing,
                reduced_cost: rc,
            });
        }
    }
    priced.sort_by(|a, b| {
        a.reduced_cost
            .total_cmp(&b.reduced_cost)
            .then_with(|| a.pairing.flights().cmp(b.pairing.flights()))
    });
    priced.truncate(max_columns);
    Ok(priced)
}

type Visitor<'v> = dyn FnMut(CrewBase, &[Duty], &[usize]) -> bool + 'v;

struct PairingWalk<'e, 'a, 'v> {
    engine: &'e PairingEngine<'a>,
    duties: &'e [Duty],
    by_first: &'e [Vec<usize>],
    visit: &'e mut Visitor<'v>,
    stopped: bool,
}

impl PairingWalk<'_, '_, '_> {
    fn extend(&mut self, base: CrewBase, chain: &mut Vec<usize>) {
        if self.stopped {
            return;
        }
        let r = self.engine.rules;
        let fl = self.engine.network.flights();
        let first = &self.duties[chain[0]];
        let last = &self.duties[chain[chain.len() - 1]];
        if last.end() - first.start() > r.tafb_max {
            return;
        }
        let last_flight = &fl[last.last_flight()];
        if last_flight.destination == base.airport && !(self.visit)(base, self.duties, chain) {
            self.stopped = true;
            return;
        }
        if chain.len() == r.pairing_max_duties {
            return;
        }
        let window = self
            .engine
            .network
            .departing_between(last_flight.arr_time + r.rest_min, last_flight.arr_time + r.rest_max);
        for next in window {
            if fl[next].origin != last_flight.destination {
                continue;
            }
            for &k in &self.by_first[next] {
                chain.push(k);
                self.extend(base, chain);
                chain.pop();
                if self.stopped {
                    return;
                }
            }
        }
    }
}
