//! Flights, crew bases, legality rules, and the pairing cost model.
//!
//! Time is integer minutes from the start of the planning horizon. Flights are
//! indexed `0..n` in departure order, so every legal connection `(i, j)` has
//! `i < j`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Minutes = i64;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("flight network has no flights")]
    Empty,
    #[error("flight {index} ({origin}->{destination}) arrives at {arr} before departing at {dep}")]
    NonPositiveBlockTime {
        index: usize,
        origin: String,
        destination: String,
        dep: Minutes,
        arr: Minutes,
    },
    #[error("crew base {0} is not served by any flight")]
    UnservedBase(String),
    #[error("invalid legality rules: {0}")]
    InvalidRules(String),
    #[error("invalid cost rules: {0}")]
    InvalidCosts(String),
    #[error("duty has no flights")]
    EmptyDuty,
    #[error("pairing has no duties")]
    EmptyPairing,
    #[error("flight id {0} is not part of the network")]
    UnknownFlight(usize),
    #[error("unknown airport {0}")]
    UnknownAirport(String),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing network config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("writing network config: {0}")]
    Serialize(#[from] toml::ser::Error),
}

/// Interned airport code; resolve names through [`FlightNetwork::airport_name`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AirportId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flight {
    pub id: usize,
    pub origin: AirportId,
    pub destination: AirportId,
    pub dep_time: Minutes,
    pub arr_time: Minutes,
}

impl Flight {
    pub fn block_time(&self) -> Minutes {
        self.arr_time - self.dep_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CrewBase {
    pub airport: AirportId,
}

/// One flight record as it appears in a configuration file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlightSpec {
    pub origin: String,
    pub destination: String,
    pub dep: Minutes,
    pub arr: Minutes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LegalityRules {
    pub sit_min: Minutes,
    pub sit_max: Minutes,
    pub duty_max_flying: Minutes,
    pub duty_max_elapsed: Minutes,
    pub duty_max_flights: usize,
    pub rest_min: Minutes,
    pub rest_max: Minutes,
    pub pairing_max_duties: usize,
    pub tafb_max: Minutes,
    pub brief: Minutes,
    pub debrief: Minutes,
}

impl Default for LegalityRules {
    fn default() -> Self {
        Self {
            sit_min: 30,
            sit_max: 240,
            duty_max_flying: 480,
            duty_max_elapsed: 840,
            duty_max_flights: 5,
            rest_min: 600,
            rest_max: 2160,
            pairing_max_duties: 4,
            tafb_max: 7200,
            brief: 45,
            debrief: 30,
        }
    }
}

/// How a gap between two consecutive flights is classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConnectionKind {
    /// Short connection inside a duty.
    Sit,
    /// Overnight rest separating two duties.
    Rest,
}

impl LegalityRules {
    pub fn validate(&self) -> Result<(), NetworkError> {
        let positive = [
            ("sit_min", self.sit_min),
            ("sit_max", self.sit_max),
            ("duty_max_flying", self.duty_max_flying),
            ("duty_max_elapsed", self.duty_max_elapsed),
            ("rest_min", self.rest_min),
            ("rest_max", self.rest_max),
            ("tafb_max", self.tafb_max),
            ("brief", self.brief),
            ("debrief", self.debrief),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v <= 0) {
            return Err(NetworkError::InvalidRules(format!("{name} must be positive")));
        }
        if self.duty_max_flights == 0 || self.pairing_max_duties == 0 {
            return Err(NetworkError::InvalidRules(
                "duty_max_flights and pairing_max_duties must be positive".into(),
            ));
        }
        if self.sit_min >= self.sit_max {
            return Err(NetworkError::InvalidRules("sit_min must be below sit_max".into()));
        }
        if self.rest_min <= self.sit_max {
            return Err(NetworkError::InvalidRules("rest_min must exceed sit_max".into()));
        }
        if self.rest_min > self.rest_max {
            return Err(NetworkError::InvalidRules("rest_min must not exceed rest_max".into()));
        }
        Ok(())
    }

    /// Classifies the ground time between two flights. Gaps strictly between
    /// `sit_max` and `rest_min` are neither a sit nor a rest and are illegal.
    pub fn classify_gap(&self, gap: Minutes) -> Option<ConnectionKind> {
        if (self.sit_min..=self.sit_max).contains(&gap) {
            Some(ConnectionKind::Sit)
        } else if (self.rest_min..=self.rest_max).contains(&gap) {
            Some(ConnectionKind::Rest)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostRules {
    pub rate_flying: f64,
    pub rate_tafb: f64,
    pub hotel_cost: f64,
    pub fixed_cost: f64,
}

impl Default for CostRules {
    fn default() -> Self {
        Self {
            rate_flying: 1.0,
            rate_tafb: 0.25,
            hotel_cost: 150.0,
            fixed_cost: 100.0,
        }
    }
}

impl CostRules {
    pub fn validate(&self) -> Result<(), NetworkError> {
        let all = [self.rate_flying, self.rate_tafb, self.hotel_cost, self.fixed_cost];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(NetworkError::InvalidCosts(
                "all cost coefficients must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// On-disk schema for a network: crew bases, rules, cost coefficients and
/// flight records. Rules and costs fall back to the defaults when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub bases: Vec<String>,
    #[serde(default)]
    pub rules: LegalityRules,
    #[serde(default)]
    pub cost: CostRules,
    pub flights: Vec<FlightSpec>,
}

impl NetworkConfig {
    pub fn load(path: &Path) -> Result<Self, NetworkError> {
        let text = std::fs::read_to_string(path).map_err(|source| NetworkError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, NetworkError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String, NetworkError> {
        Ok(toml::to_string(self)?)
    }

    pub fn build(&self) -> Result<FlightNetwork, NetworkError> {
        self.rules.validate()?;
        self.cost.validate()?;
        FlightNetwork::new(&self.flights, &self.bases)
    }
}

#[derive(Debug, Clone)]
pub struct FlightNetwork {
    airports: Vec<String>,
    flights: Vec<Flight>,
    bases: Vec<CrewBase>,
}

impl FlightNetwork {
    /// Interns airports, sorts flights by departure (stable, so ties keep input
    /// order) and assigns ids in that order.
    pub fn new(specs: &[FlightSpec], bases: &[String]) -> Result<Self, NetworkError> {
        if specs.is_empty() {
            return Err(NetworkError::Empty);
        }
        let mut index: HashMap<String, AirportId> = HashMap::new();
        let mut airports: Vec<String> = Vec::new();
        let mut intern = |name: &str| -> AirportId {
            *index.entry(name.to_string()).or_insert_with(|| {
                airports.push(name.to_string());
                AirportId(airports.len() as u32 - 1)
            })
        };

        let mut order: Vec<usize> = (0..specs.len()).collect();
        order.sort_by_key(|&k| specs[k].dep);
        let mut flights = Vec::with_capacity(specs.len());
        for (id, &k) in order.iter().enumerate() {
            let s = &specs[k];
            if s.arr <= s.dep {
                return Err(NetworkError::NonPositiveBlockTime {
                    index: k,
                    origin: s.origin.clone(),
                    destination: s.destination.clone(),
                    dep: s.dep,
                    arr: s.arr,
                });
            }
            let origin = intern(&s.origin);
            let destination = intern(&s.destination);
            flights.push(Flight {
                id,
                origin,
                destination,
                dep_time: s.dep,
                arr_time: s.arr,
            });
        }

        let mut crew_bases = Vec::with_capacity(bases.len());
        for name in bases {
            let Some(airport) = airports.iter().position(|a| a == name).map(|k| AirportId(k as u32)) else {
                return Err(NetworkError::UnservedBase(name.clone()));
            };
            if !crew_bases.iter().any(|b: &CrewBase| b.airport == airport) {
                crew_bases.push(CrewBase { airport });
            }
        }

        Ok(Self {
            airports,
            flights,
            bases: crew_bases,
        })
    }

    pub fn len(&self) -> usize {
        self.flights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flights.is_empty()
    }

    pub fn flights(&self) -> &[Flight] {
        &self.flights
    }

    pub fn flight(&self, id: usize) -> Option<&Flight> {
        self.flights.get(id)
    }

    pub fn bases(&self) -> &[CrewBase] {
        &self.bases
    }

    pub fn is_base(&self, airport: AirportId) -> bool {
        self.bases.iter().any(|b| b.airport == airport)
    }

    pub fn airport_name(&self, id: AirportId) -> &str {
        &self.airports[id.0 as usize]
    }

    pub fn airport_id(&self, name: &str) -> Option<AirportId> {
        self.airports
            .iter()
            .position(|a| a == name)
            .map(|k| AirportId(k as u32))
    }

    pub fn num_airports(&self) -> usize {
        self.airports.len()
    }

    /// Flights departing in `[from, to]`, as an id range (flights are sorted by
    /// departure).
    pub fn departing_between(&self, from: Minutes, to: Minutes) -> std::ops::Range<usize> {
        let lo = self.flights.partition_point(|f| f.dep_time < from);
        let hi = self.flights.partition_point(|f| f.dep_time <= to);
        lo..hi.max(lo)
    }

    /// Converts back into the file schema, preserving flight order.
    pub fn to_config(&self, rules: LegalityRules, cost: CostRules) -> NetworkConfig {
        NetworkConfig {
            bases: self
                .bases
                .iter()
                .map(|b| self.airport_name(b.airport).to_string())
                .collect(),
            rules,
            cost,
            flights: self
                .flights
                .iter()
                .map(|f| FlightSpec {
                    origin: self.airport_name(f.origin).to_string(),
                    destination: self.airport_name(f.destination).to_string(),
                    dep: f.dep_time,
                    arr: f.arr_time,
                })
                .collect(),
        }
    }
}

/// Legal connection between two flights, classified as a sit or a rest.
pub fn connection_kind(
    network: &FlightNetwork,
    rules: &LegalityRules,
    from: usize,
    to: usize,
) -> Option<ConnectionKind> {
    let (a, b) = (network.flight(from)?, network.flight(to)?);
    if from >= to || a.destination != b.origin {
        return None;
    }
    rules.classify_gap(b.dep_time - a.arr_time)
}

/// Every ordered flight pair `(i, j)`, `i < j`, that may follow each other in a
/// pairing: the arrival airport of `i` is the departure airport of `j` and the
/// ground time is a legal sit or a legal rest.
pub fn connection_universe(network: &FlightNetwork, rules: &LegalityRules) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for f in network.flights() {
        for j in network.departing_between(f.arr_time + rules.sit_min, f.arr_time + rules.rest_max) {
            if j > f.id && connection_kind(network, rules, f.id, j).is_some() {
                out.push((f.id, j));
            }
        }
    }
    out
}

/// A working day: consecutive flights bracketed by briefing and debriefing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Duty {
    flights: Vec<usize>,
    start: Minutes,
    end: Minutes,
    flying: Minutes,
}

impl Duty {
    pub fn new(network: &FlightNetwork, rules: &LegalityRules, flights: Vec<usize>) -> Result<Self, NetworkError> {
        let (Some(&first), Some(&last)) = (flights.first(), flights.last()) else {
            return Err(NetworkError::EmptyDuty);
        };
        let mut flying = 0;
        for &id in &flights {
            flying += network.flight(id).ok_or(NetworkError::UnknownFlight(id))?.block_time();
        }
        Ok(Self {
            start: network.flights()[first].dep_time - rules.brief,
            end: network.flights()[last].arr_time + rules.debrief,
            flights,
            flying,
        })
    }

    pub fn flights(&self) -> &[usize] {
        &self.flights
    }

    /// Report time, including the briefing.
    pub fn start(&self) -> Minutes {
        self.start
    }

    /// Release time, including the debriefing.
    pub fn end(&self) -> Minutes {
        self.end
    }

    pub fn elapsed(&self) -> Minutes {
        self.end - self.start
    }

    pub fn flying(&self) -> Minutes {
        self.flying
    }

    pub fn first_flight(&self) -> usize {
        self.flights[0]
    }

    pub fn last_flight(&self) -> usize {
        self.flights[self.flights.len() - 1]
    }
}

/// A sequence of duties flown by one crew from its base and back.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    duties: Vec<Duty>,
    base: CrewBase,
    cost: f64,
    tafb: Minutes,
}

impl Pairing {
    /// Assembles a pairing and prices it; legality is checked separately by
    /// [`check_pairing_legal`].
    pub fn new(base: CrewBase, duties: Vec<Duty>, costs: &CostRules) -> Result<Self, NetworkError> {
        let (Some(first), Some(last)) = (duties.first(), duties.last()) else {
            return Err(NetworkError::EmptyPairing);
        };
        let tafb = last.end() - first.start();
        let mut p = Self {
            duties,
            base,
            cost: 0.0,
            tafb,
        };
        p.cost = pairing_cost(&p, costs);
        Ok(p)
    }

    /// Builds a pairing from a flat flight sequence, splitting duties at
    /// every gap longer than `sit_max`. The base is the origin of the first
    /// flight.
    pub fn from_flights(
        network: &FlightNetwork,
        rules: &LegalityRules,
        costs: &CostRules,
        flights: &[usize],
    ) -> Result<Self, NetworkError> {
        let first = *flights.first().ok_or(NetworkError::EmptyPairing)?;
        let base = CrewBase {
            airport: network.flight(first).ok_or(NetworkError::UnknownFlight(first))?.origin,
        };
        let mut duties = Vec::new();
        let mut current = vec![first];
        for w in flights.windows(2) {
            let a = network.flight(w[0]).ok_or(NetworkError::UnknownFlight(w[0]))?;
            let b = network.flight(w[1]).ok_or(NetworkError::UnknownFlight(w[1]))?;
            if b.dep_time - a.arr_time > rules.sit_max {
                duties.push(Duty::new(network, rules, std::mem::take(&mut current))?);
            }
            current.push(w[1]);
        }
        duties.push(Duty::new(network, rules, current)?);
        Self::new(base, duties, costs)
    }

    pub fn duties(&self) -> &[Duty] {
        &self.duties
    }

    pub fn base(&self) -> CrewBase {
        self.base
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn tafb(&self) -> Minutes {
        self.tafb
    }

    pub fn flying(&self) -> Minutes {
        self.duties.iter().map(Duty::flying).sum()
    }

    pub fn flights(&self) -> impl Iterator<Item = usize> + '_ {
        self.duties.iter().flat_map(|d| d.flights().iter().copied())
    }

    pub fn flight_sequence(&self) -> Vec<usize> {
        self.flights().collect()
    }

    pub fn num_flights(&self) -> usize {
        self.duties.iter().map(|d| d.flights().len()).sum()
    }

    /// Consecutive flight pairs, within and across duties.
    pub fn connections(&self) -> Vec<(usize, usize)> {
        let seq = self.flight_sequence();
        seq.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// `rate_flying * flying + rate_tafb * TAFB + hotel_cost * overnights + fixed_cost * duties`.
pub fn pairing_cost(p: &Pairing, cost: &CostRules) -> f64 {
    let duties = p.duties().len() as f64;
    cost.rate_flying * p.flying() as f64
        + cost.rate_tafb * p.tafb() as f64
        + cost.hotel_cost * (duties - 1.0)
        + cost.fixed_cost * duties
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    /// Pairing base is not a crew base of the network.
    UnknownBase,
    /// First flight does not leave from the pairing's base.
    BaseStart,
    /// Last flight does not return to the pairing's base.
    BaseReturn,
    /// Two consecutive flights do not share an airport.
    AirportContinuity,
    SitTime,
    DutyFlying,
    DutyElapsed,
    DutyFlights,
    RestTime,
    PairingDuties,
    Tafb,
}

impl Violation {
    pub fn name(self) -> &'static str {
        match self {
            Violation::UnknownBase => "unknown-base",
            Violation::BaseStart => "base-start",
            Violation::BaseReturn => "base-return",
            Violation::AirportContinuity => "airport-continuity",
            Violation::SitTime => "sit-time",
            Violation::DutyFlying => "duty-flying",
            Violation::DutyElapsed => "duty-elapsed",
            Violation::DutyFlights => "duty-flights",
            Violation::RestTime => "rest-time",
            Violation::PairingDuties => "pairing-duties",
            Violation::Tafb => "tafb",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Legality {
    pub violations: Vec<Violation>,
}

impl Legality {
    pub fn is_legal(&self) -> bool {
        self.violations.is_empty()
    }

    fn flag(&mut self, v: Violation) {
        if !self.violations.contains(&v) {
            self.violations.push(v);
        }
    }
}

/// Checks every duty and pairing rule. Each failed rule is listed once; the
/// only error is a pairing that references flights outside `network`.
pub fn check_pairing_legal(
    network: &FlightNetwork,
    p: &Pairing,
    rules: &LegalityRules,
) -> Result<Legality, NetworkError> {
    for id in p.flights() {
        network.flight(id).ok_or(NetworkError::UnknownFlight(id))?;
    }
    let fl = network.flights();
    let mut out = Legality::default();

    if !network.is_base(p.base().airport) {
        out.flag(Violation::UnknownBase);
    }
    let first = &fl[p.duties()[0].first_flight()];
    let last = &fl[p.duties()[p.duties().len() - 1].last_flight()];
    if first.origin != p.base().airport {
        out.flag(Violation::BaseStart);
    }
    if last.destination != p.base().airport {
        out.flag(Violation::BaseReturn);
    }

    for duty in p.duties() {
        for w in duty.flights().windows(2) {
            let (a, b) = (&fl[w[0]], &fl[w[1]]);
            if a.destination != b.origin {
                out.flag(Violation::AirportContinuity);
            }
            let gap = b.dep_time - a.arr_time;
            if gap < rules.sit_min || gap > rules.sit_max {
                out.flag(Violation::SitTime);
            }
        }
        if duty.flying() > rules.duty_max_flying {
            out.flag(Violation::DutyFlying);
        }
        if duty.elapsed() > rules.duty_max_elapsed {
            out.flag(Violation::DutyElapsed);
        }
        if duty.flights().len() > rules.duty_max_flights {
            out.flag(Violation::DutyFlights);
        }
    }

    for w in p.duties().windows(2) {
        let (a, b) = (&fl[w[0].last_flight()], &fl[w[1].first_flight()]);
        if a.destination != b.origin {
            out.flag(Violation::AirportContinuity);
        }
        let gap = b.dep_time - a.arr_time;
        if gap < rules.rest_min || gap > rules.rest_max {
            out.flag(Violation::RestTime);
        }
    }
    if p.duties().len() > rules.pairing_max_duties {
        out.flag(Violation::PairingDuties);
    }
    if p.tafb() > rules.tafb_max {
        out.flag(Violation::Tafb);
    }
    Ok(out)
}
