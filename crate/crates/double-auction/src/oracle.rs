//! Reference computations for tests: the optimal uniform volume by
//! price scan, the maximum volume by augmenting paths, and exhaustive
//! enumeration of fair matchings on tiny books.
//!
//! These are deliberately slower than the production algorithms and
//! share no code with them, so agreement between the two is meaningful.

use std::collections::VecDeque;

use crate::error::Error;
use crate::order::{demand, is_tradable, supply, Matching, OrderDomain, Transaction};
use crate::properties::{is_fair, is_valid_matching};

fn require_admissible(d: &OrderDomain) -> Result<(), Error> {
    let report = d.check_admissible();
    if report.is_admissible() {
        Ok(())
    } else {
        Err(Error::Inadmissible(report))
    }
}

/// Largest volume any uniform-price matching can reach: the best
/// min(demand, supply) over every observed limit price. Both curves are
/// step functions that only move at order prices, so the scan is exact.
pub fn optimal_uniform_volume(d: &OrderDomain) -> Result<u128, Error> {
    require_admissible(d)?;
    let mut best = 0u128;
    for o in d.bids.iter().chain(&d.asks) {
        let p = o.price() as u128;
        best = best.max(demand(&d.bids, p).min(supply(&d.asks, p)));
    }
    Ok(best)
}

/// Maximum volume over all valid matchings, computed as max flow on the
/// bipartite tradability graph: source to bids at bid quantity, asks to
/// sink at ask quantity, unbounded edges between tradable pairs.
/// Shortest augmenting paths; intended for desk-scale books.
pub fn max_matching_volume(d: &OrderDomain) -> Result<u128, Error> {
    require_admissible(d)?;
    let nb = d.bids.len();
    let na = d.asks.len();
    let n = nb + na + 2;
    let source = 0;
    let sink = n - 1;
    let unbounded = u128::MAX / 2;

    let mut cap = vec![vec![0u128; n]; n];
    for (i, b) in d.bids.iter().enumerate() {
        cap[source][1 + i] = b.quantity() as u128;
    }
    for (j, a) in d.asks.iter().enumerate() {
        cap[1 + nb + j][sink] = a.quantity() as u128;
    }
    for (i, b) in d.bids.iter().enumerate() {
        for (j, a) in d.asks.iter().enumerate() {
            if is_tradable(b, a) {
                cap[1 + i][1 + nb + j] = unbounded;
            }
        }
    }

    let mut flow = 0u128;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[source] = source;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && cap[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            break;
        }
        let mut bottleneck = u128::MAX;
        let mut v = sink;
        while v != source {
            let u = parent[v];
            bottleneck = bottleneck.min(cap[u][v]);
            v = u;
        }
        let mut v = sink;
        while v != source {
            let u = parent[v];
            cap[u][v] -= bottleneck;
            cap[v][u] += bottleneck;
            v = u;
        }
        flow += bottleneck;
    }
    Ok(flow)
}

/// Enumeration limits: total volume and tradable pair count. Past these
/// the assignment space is too large to walk in a test.
pub const ENUM_MAX_VOLUME: u128 = 8;
pub const ENUM_MAX_PAIRS: usize = 16;

/// Every fair matching with exactly `target_vol` total volume, one
/// canonical transaction per traded pair priced at the ask's limit,
/// returned up to transaction order. Faults on books beyond the
/// documented limits (volume 8, 16 tradable pairs).
pub fn enumerate_fair_witnesses(
    d: &OrderDomain,
    target_vol: u128,
) -> Result<Vec<Matching>, Error> {
    require_admissible(d)?;
    if target_vol > ENUM_MAX_VOLUME {
        return Err(Error::InstanceTooLarge { limit: ENUM_MAX_VOLUME, requested: target_vol });
    }
    let pairs: Vec<(usize, usize)> = (0..d.bids.len())
        .flat_map(|i| (0..d.asks.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| is_tradable(&d.bids[i], &d.asks[j]))
        .collect();
    if pairs.len() > ENUM_MAX_PAIRS {
        return Err(Error::InstanceTooLarge {
            limit: ENUM_MAX_PAIRS as u128,
            requested: pairs.len() as u128,
        });
    }

    // Upper bound on what the suffix of pairs can still carry, ignoring
    // shared capacities; used only to prune hopeless branches.
    let mut suffix_cap = vec![0u64; pairs.len() + 1];
    for (k, &(i, j)) in pairs.iter().enumerate().rev() {
        suffix_cap[k] =
            suffix_cap[k + 1].saturating_add(d.bids[i].quantity().min(d.asks[j].quantity()));
    }

    let mut out = Vec::new();
    let mut quantities = vec![0u64; pairs.len()];
    let mut bid_used = vec![0u64; d.bids.len()];
    let mut ask_used = vec![0u64; d.asks.len()];
    search(
        d,
        &pairs,
        &suffix_cap,
        0,
        target_vol as u64,
        &mut quantities,
        &mut bid_used,
        &mut ask_used,
        &mut out,
    )?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn search(
    d: &OrderDomain,
    pairs: &[(usize, usize)],
    suffix_cap: &[u64],
    k: usize,
    remaining: u64,
    quantities: &mut Vec<u64>,
    bid_used: &mut Vec<u64>,
    ask_used: &mut Vec<u64>,
    out: &mut Vec<Matching>,
) -> Result<(), Error> {
    if remaining > suffix_cap[k] {
        return Ok(());
    }
    if k == pairs.len() {
        if remaining == 0 {
            let txs: Vec<Transaction> = pairs
                .iter()
                .zip(quantities.iter())
                .filter(|(_, &q)| q > 0)
                .map(|(&(i, j), &q)| Transaction {
                    bid_id: d.bids[i].id(),
                    ask_id: d.asks[j].id(),
                    quantity: q,
                    price: d.asks[j].price(),
                })
                .collect();
            let m = Matching::new(txs);
            if is_valid_matching(&m, d)? && is_fair(&m, d)? {
                out.push(m);
            }
        }
        return Ok(());
    }
    let (i, j) = pairs[k];
    let cap = remaining
        .min(d.bids[i].quantity() - bid_used[i])
        .min(d.asks[j].quantity() - ask_used[j]);
    for q in 0..=cap {
        quantities[k] = q;
        bid_used[i] += q;
        ask_used[j] += q;
        search(d, pairs, suffix_cap, k + 1, remaining - q, quantities, bid_used, ask_used, out)?;
        bid_used[i] -= q;
        ask_used[j] -= q;
        quantities[k] = 0;
    }
    Ok(())
}
