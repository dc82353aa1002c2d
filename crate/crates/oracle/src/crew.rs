//! Crew legality by exhaustive filtering.
//!
//! Any legal pairing visits flights in strictly increasing departure order
//! (every ground gap is positive), so enumerating subsets of a flight set in
//! index order covers every candidate sequence when flights are indexed by
//! departure time.

#[derive(Debug, Clone, Copy)]
pub struct RawFlight {
    pub origin: u32,
    pub destination: u32,
    pub dep: i64,
    pub arr: i64,
}

#[derive(Debug, Clone, Copy)]
pub struct RawRules {
    pub sit_min: i64,
    pub sit_max: i64,
    pub duty_max_flying: i64,
    pub duty_max_elapsed: i64,
    pub duty_max_flights: usize,
    pub rest_min: i64,
    pub rest_max: i64,
    pub pairing_max_duties: usize,
    pub tafb_max: i64,
    pub brief: i64,
    pub debrief: i64,
}

/// Names of the rules a pairing (given as its duty split) breaks.
pub fn pairing_violations(
    flights: &[RawFlight],
    bases: &[u32],
    base: u32,
    duties: &[Vec<usize>],
    rules: &RawRules,
) -> Vec<&'static str> {
    let mut out: Vec<&'static str> = Vec::new();
    let mut flag = |name: &'static str| {
        if !out.contains(&name) {
            out.push(name);
        }
    };
    if !bases.contains(&base) {
        flag("unknown-base");
    }
    let flat: Vec<usize> = duties.iter().flatten().copied().collect();
    if flights[flat[0]].origin != base {
        flag("base-start");
    }
    if flights[*flat.last().unwrap()].destination != base {
        flag("base-return");
    }
    for duty in duties {
        let mut flying = 0;
        for (k, &f) in duty.iter().enumerate() {
            flying += flights[f].arr - flights[f].dep;
            if k > 0 {
                let prev = flights[duty[k - 1]];
                if prev.destination != flights[f].origin {
                    flag("airport-continuity");
                }
                let gap = flights[f].dep - prev.arr;
                if !(rules.sit_min <= gap && gap <= rules.sit_max) {
                    flag("sit-time");
                }
            }
        }
        if flying > rules.duty_max_flying {
            flag("duty-flying");
        }
        let span = (flights[*duty.last().unwrap()].arr + rules.debrief) - (flights[duty[0]].dep - rules.brief);
        if span > rules.duty_max_elapsed {
            flag("duty-elapsed");
        }
        if duty.len() > rules.duty_max_flights {
            flag("duty-flights");
        }
    }
    for k in 1..duties.len() {
        let prev = flights[*duties[k - 1].last().unwrap()];
        let next = flights[duties[k][0]];
        if prev.destination != next.origin {
            flag("airport-continuity");
        }
        let gap = next.dep - prev.arr;
        if !(rules.rest_min <= gap && gap <= rules.rest_max) {
            flag("rest-time");
        }
    }
    if duties.len() > rules.pairing_max_duties {
        flag("pairing-duties");
    }
    let tafb = (flights[*flat.last().unwrap()].arr + rules.debrief) - (flights[flat[0]].dep - rules.brief);
    if tafb > rules.tafb_max {
        flag("tafb");
    }
    out
}

/// Every legal duty drawn from `subset`, as flight sequences in lexicographic order.
pub fn all_duties(flights: &[RawFlight], subset: &[usize], rules: &RawRules) -> Vec<Vec<usize>> {
    let mut ids: Vec<usize> = subset.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let mut out = Vec::new();
    for seq in increasing_sequences(&ids, rules.duty_max_flights) {
        let ok = seq.windows(2).all(|w| {
            let (a, b) = (flights[w[0]], flights[w[1]]);
            let gap = b.dep - a.arr;
            a.destination == b.origin && rules.sit_min <= gap && gap <= rules.sit_max
        });
        if !ok {
            continue;
        }
        let flying: i64 = seq.iter().map(|&f| flights[f].arr - flights[f].dep).sum();
        let span = flights[*seq.last().unwrap()].arr + rules.debrief - flights[seq[0]].dep + rules.brief;
        if flying <= rules.duty_max_flying && span <= rules.duty_max_elapsed {
            out.push(seq);
        }
    }
    out.sort();
    out
}

/// Every legal pairing drawn from `subset`, as flight sequences in
/// lexicographic order. The duty split of a sequence is forced: gaps up to
/// `sit_max` stay inside a duty, longer ones must be rests.
pub fn all_pairings(flights: &[RawFlight], subset: &[usize], bases: &[u32], rules: &RawRules) -> Vec<Vec<usize>> {
    let mut ids: Vec<usize> = subset.to_vec();
    ids.sort_unstable();
    ids.dedup();
    assert!(ids.len() <= 20, "exhaustive pairing oracle limited to 20 flights");
    let max_len = rules.duty_max_flights * rules.pairing_max_duties;
    let mut out = Vec::new();
    for seq in increasing_sequences(&ids, max_len) {
        let base = flights[seq[0]].origin;
        let mut duties: Vec<Vec<usize>> = vec![vec![seq[0]]];
        for w in seq.windows(2) {
            if flights[w[1]].dep - flights[w[0]].arr > rules.sit_max {
                duties.push(Vec::new());
            }
            duties.last_mut().unwrap().push(w[1]);
        }
        if pairing_violations(flights, bases, base, &duties, rules).is_empty() {
            out.push(seq);
        }
    }
    out.sort();
    out
}

/// All non-empty increasing subsequences of `ids` up to `max_len` long.
fn increasing_sequences(ids: &[usize], max_len: usize) -> Vec<Vec<usize>> {
    assert!(ids.len() < 31);
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << ids.len()) {
        if mask.count_ones() as usize > max_len {
            continue;
        }
        out.push(
            (0..ids.len())
                .filter(|k| mask & (1 << k) != 0)
                .map(|k| ids[k])
                .collect(),
        );
    }
    out
}
