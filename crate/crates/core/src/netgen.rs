//! Synthetic hub-and-spoke flight schedules.
//!
//! Flights are laid down as the legs of randomly drawn pairings that start
//! and end at a crew base, so every flight lies on at least one legal
//! pairing. Overlapping pairings at the hubs create the alternative
//! connections that make the covering problem non-trivial.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{
    check_pairing_legal, CostRules, FlightNetwork, FlightSpec, LegalityRules, Minutes, NetworkConfig, NetworkError,
    Pairing,
};

#[derive(Debug, Error)]
pub enum NetGenError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("no legal pairing found after {attempts} attempts ({last})")]
    RetriesExhausted { attempts: usize, last: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetGenConfig {
    pub num_hubs: usize,
    pub num_spokes: usize,
    pub num_bases: usize,
    pub flights_per_day: usize,
    pub num_days: usize,
    pub seed: u64,
    /// Attempts per pairing before giving up.
    pub max_retries: usize,
}

impl Default for NetGenConfig {
    fn default() -> Self {
        Self {
            num_hubs: 3,
            num_spokes: 8,
            num_bases: 2,
            flights_per_day: 60,
            num_days: 2,
            seed: 0,
            max_retries: 200,
        }
    }
}

impl NetGenConfig {
    pub fn validate(&self) -> Result<(), NetGenError> {
        let bad = |m: &str| Err(NetGenError::Config(m.to_string()));
        if self.num_hubs == 0 {
            return bad("need at least one hub");
        }
        if self.num_bases == 0 || self.num_bases > self.num_hubs {
            return bad("num_bases must be between 1 and num_hubs");
        }
        if self.num_hubs == 1 && self.num_spokes == 0 {
            return bad("a single hub needs spokes");
        }
        if self.flights_per_day < 2 || self.num_days == 0 {
            return bad("need at least 2 flights per day and 1 day");
        }
        if self.max_retries == 0 {
            return bad("max_retries must be positive");
        }
        Ok(())
    }

    /// Flight count actually generated: odd totals need a three-hub cycle, so
    /// with fewer than three hubs they are rounded up to even.
    pub fn target_flights(&self) -> usize {
        let t = self.flights_per_day * self.num_days;
        if self.num_hubs < 3 && t % 2 == 1 {
            t + 1
        } else {
            t
        }
    }
}

pub fn hub_name(h: usize) -> String {
    format!("H{}", h + 1)
}

pub fn spoke_name(s: usize) -> String {
    format!("S{}", s + 1)
}

/// Spoke `s` hangs off hub `s % num_hubs`.
fn spoke_hub(s: usize, cfg: &NetGenConfig) -> usize {
    s % cfg.num_hubs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Airport {
    Hub(usize),
    Spoke(usize),
}

impl Airport {
    fn name(self) -> String {
        match self {
            Airport::Hub(h) => hub_name(h),
            Airport::Spoke(s) => spoke_name(s),
        }
    }
}

/// A generated schedule together with the pairings it was built from.
#[derive(Debug, Clone)]
pub struct GeneratedNetwork {
    pub config: NetworkConfig,
    pub network: FlightNetwork,
    /// Flight ids (in network order) of each seed pairing.
    pub templates: Vec<Vec<usize>>,
}

pub fn generate_network(
    cfg: &NetGenConfig,
    rules: &LegalityRules,
    cost: &CostRules,
) -> Result<GeneratedNetwork, NetGenError> {
    cfg.validate()?;
    rules.validate()?;
    cost.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let target = cfg.target_flights();
    let bases: Vec<String> = (0..cfg.num_bases).map(hub_name).collect();

    let mut specs: Vec<(FlightSpec, usize)> = Vec::with_capacity(target);
    let mut templates = 0;
    while specs.len() < target {
        let remaining = target - specs.len();
        let base = rng.random_range(0..cfg.num_bases);
        let mut attempt = 0;
        let legs = loop {
            attempt += 1;
            let route = draw_route(cfg, base, remaining, &mut rng);
            match schedule(&route, cfg, rules, &mut rng) {
                Some(legs) if legal(&legs, &bases, rules, cost)? => break legs,
                _ if attempt >= cfg.max_retries => {
                    return Err(NetGenError::RetriesExhausted {
                        attempts: attempt,
                        last: format!("{} legs from {}", route.len() - 1, hub_name(base)),
                    })
                }
                _ => {}
            }
        };
        specs.extend(legs.into_iter().map(|l| (l, templates)));
        templates += 1;
    }

    specs.sort_by_key(|(s, _)| s.dep);
    let mut by_template = vec![Vec::new(); templates];
    for (id, (_, t)) in specs.iter().enumerate() {
        by_template[*t].push(id);
    }
    let flights: Vec<FlightSpec> = specs.into_iter().map(|(s, _)| s).collect();
    let config = NetworkConfig {
        bases,
        rules: *rules,
        cost: *cost,
        flights,
    };
    let network = config.build()?;
    Ok(GeneratedNetwork {
        config,
        network,
        templates: by_template,
    })
}

/// Airports visited by one pairing, starting and ending at hub `base`, with
/// `2..=remaining` legs where possible and never leaving exactly one leg
/// for the next pairing.
fn draw_route(cfg: &NetGenConfig, base: usize, remaining: usize, rng: &mut ChaCha8Rng) -> Vec<Airport> {
    let mut route = vec![Airport::Hub(base)];
    let goal = rng.random_range(2..=8).min(remaining);
    let own_spokes: Vec<usize> = (0..cfg.num_spokes).filter(|&s| spoke_hub(s, cfg) == base).collect();
    let other_hubs: Vec<usize> = (0..cfg.num_hubs).filter(|&h| h != base).collect();
    loop {
        let left = remaining - (route.len() - 1);
        let done = route.len() - 1;
        if done >= goal && left != 1 {
            break;
        }
        // Excursions of 2, 3 or 4 legs out of the base and back.
        let mut options: Vec<Vec<Airport>> = Vec::new();
        for &s in &own_spokes {
            options.push(vec![Airport::Spoke(s), Airport::Hub(base)]);
        }
        for &h in &other_hubs {
            options.push(vec![Airport::Hub(h), Airport::Hub(base)]);
            for s in (0..cfg.num_spokes).filter(|&s| spoke_hub(s, cfg) == h) {
                options.push(vec![
                    Airport::Hub(h),
                    Airport::Spoke(s),
                    Airport::Hub(h),
                    Airport::Hub(base),
                ]);
            }
            for &h2 in &other_hubs {
                if h2 != h {
                    options.push(vec![Airport::Hub(h), Airport::Hub(h2), Airport::Hub(base)]);
                }
            }
        }
        let fits: Vec<&Vec<Airport>> = options
            .iter()
            .filter(|o| o.len() <= left && left - o.len() != 1)
            .collect();
        let Some(ex) = fits.choose(rng) else {
            break;
        };
        route.extend(ex.iter().copied());
    }
    route
}

fn block_time(a: Airport, b: Airport, rng: &mut ChaCha8Rng) -> Minutes {
    match (a, b) {
        (Airport::Hub(_), Airport::Hub(_)) => rng.random_range(90..=180),
        _ => rng.random_range(50..=120),
    }
}

/// Times the legs of `route`: sits inside a duty, an overnight rest when
/// the next leg would break a duty limit.
fn schedule(route: &[Airport], cfg: &NetGenConfig, r: &LegalityRules, rng: &mut ChaCha8Rng) -> Option<Vec<FlightSpec>> {
    if route.len() < 3 {
        return None;
    }
    let day = rng.random_range(0..cfg.num_days) as Minutes;
    let mut clock = day * 1440 + rng.random_range(330..=600);
    let mut legs = Vec::with_capacity(route.len() - 1);
    let mut duty_start = clock;
    let mut duty_flying = 0;
    let mut duty_flights = 0;
    let mut duties = 1;
    let sit_hi = (r.sit_min + 90).min(r.sit_max);
    let rest_hi = (r.rest_min + 240).min(r.rest_max);
    for w in route.windows(2) {
        let block = block_time(w[0], w[1], rng);
        let mut dep = if legs.is_empty() {
            clock
        } else {
            clock + rng.random_range(r.sit_min + 10..=sit_hi.max(r.sit_min + 10))
        };
        let over = duty_flights + 1 > r.duty_max_flights.min(4)
            || duty_flying + block > r.duty_max_flying
            || dep + block + r.debrief - (duty_start - r.brief) > r.duty_max_elapsed;
        if over && !legs.is_empty() {
            duties += 1;
            if duties > r.pairing_max_duties {
                return None;
            }
            dep = clock + rng.random_range(r.rest_min..=rest_hi);
            duty_start = dep;
            duty_flying = 0;
            duty_flights = 0;
        }
        let arr = dep + block;
        legs.push(FlightSpec {
            origin: w[0].name(),
            destination: w[1].name(),
            dep,
            arr,
        });
        duty_flying += block;
        duty_flights += 1;
        clock = arr;
    }
    Some(legs)
}

fn legal(legs: &[FlightSpec], bases: &[String], rules: &LegalityRules, cost: &CostRules) -> Result<bool, NetGenError> {
    let net = match FlightNetwork::new(legs, bases) {
        Ok(n) => n,
        Err(NetworkError::UnservedBase(_)) => {
            // Only one base is served by a single pairing; check against it alone.
            let origin = legs[0].origin.clone();
            FlightNetwork::new(legs, &[origin])?
        }
        Err(e) => return Err(e.into()),
    };
    let ids: Vec<usize> = (0..net.len()).collect();
    let p = Pairing::from_flights(&net, rules, cost, &ids)?;
    Ok(check_pairing_legal(&net, &p, rules)?.is_legal())
}
