//! Executable predicates over matchings: validity, uniformity, fairness,
//! and the demand-supply volume bound.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::Error;
use crate::order::{
    demand, is_tradable, side_issues, supply, AdmissibilityReport, Matching, Order, OrderDomain,
    Side,
};

/// One finding from a predicate check. Every detail names the orders or
/// transactions involved plus the offending quantities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationDetail {
    /// A transaction references an id that is not in the book.
    NotOverDomain { index: usize, side: Side, id: u64 },
    /// An order's traded total exceeds its submitted quantity.
    QuantityExceeded { side: Side, id: u64, traded: u128, quantity: u64 },
    /// A transaction's price falls outside the bid-ask limit interval.
    PriceOutOfRange { index: usize, bid_id: u64, ask_id: u64, price: u64 },
    /// A matched pair whose bid limit is below the ask limit.
    NotTradable { index: usize, bid_id: u64, ask_id: u64 },
    /// A transaction priced differently from the first transaction.
    NonUniformPrice { index: usize, price: u64, first_price: u64 },
    /// A more competitive bid is left short while a worse bid trades.
    UnfairBid { more_competitive: u64, less_competitive: u64, traded: u128, quantity: u64 },
    /// Ask-side counterpart of [`ViolationDetail::UnfairBid`].
    UnfairAsk { more_competitive: u64, less_competitive: u64, traded: u128, quantity: u64 },
    /// Traded volume exceeds demand plus supply at some price.
    BoundExceeded { price: u128, volume: u128, bound: u128 },
}

impl fmt::Display for ViolationDetail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationDetail::NotOverDomain { index, side, id } => {
                write!(f, "not_over_domain index={index} side={side} id={id}")
            }
            ViolationDetail::QuantityExceeded { side, id, traded, quantity } => {
                write!(
                    f,
                    "quantity_exceeded side={side} id={id} traded={traded} quantity={quantity}"
                )
            }
            ViolationDetail::PriceOutOfRange { index, bid_id, ask_id, price } => {
                write!(
                    f,
                    "price_out_of_range index={index} bid={bid_id} ask={ask_id} price={price}"
                )
            }
            ViolationDetail::NotTradable { index, bid_id, ask_id } => {
                write!(f, "not_tradable index={index} bid={bid_id} ask={ask_id}")
            }
            ViolationDetail::NonUniformPrice { index, price, first_price } => {
                write!(
                    f,
                    "non_uniform_price index={index} price={price} first_price={first_price}"
                )
            }
            ViolationDetail::UnfairBid { more_competitive, less_competitive, traded, quantity } => {
                write!(
                    f,
                    "unfair_bid more_competitive={more_competitive} \
                     less_competitive={less_competitive} traded={traded} quantity={quantity}"
                )
            }
            ViolationDetail::UnfairAsk { more_competitive, less_competitive, traded, quantity } => {
                write!(
                    f,
                    "unfair_ask more_competitive={more_competitive} \
                     less_competitive={less_competitive} traded={traded} quantity={quantity}"
                )
            }
            ViolationDetail::BoundExceeded { price, volume, bound } => {
                write!(f, "bound_exceeded price={price} volume={volume} bound={bound}")
            }
        }
    }
}

fn require_admissible(d: &OrderDomain) -> Result<(), Error> {
    let report = d.check_admissible();
    if report.is_admissible() {
        Ok(())
    } else {
        Err(Error::Inadmissible(report))
    }
}

/// Checks validity of `m` over `d`: every transaction resolves to a
/// tradable pair, its price lies inside the bid-ask interval, and each
/// order's traded total stays within its quantity. Faults if `d` is
/// inadmissible.
pub fn validate_matching(m: &Matching, d: &OrderDomain) -> Result<Vec<ViolationDetail>, Error> {
    require_admissible(d)?;
    let bids: BTreeMap<u64, &Order> = d.bids.iter().map(|o| (o.id(), o)).collect();
    let asks: BTreeMap<u64, &Order> = d.asks.iter().map(|o| (o.id(), o)).collect();

    let mut details = Vec::new();
    for (index, t) in m.transactions().iter().enumerate() {
        let bid = bids.get(&t.bid_id()).copied();
        let ask = asks.get(&t.ask_id()).copied();
        if bid.is_none() {
            details.push(ViolationDetail::NotOverDomain { index, side: Side::Bid, id: t.bid_id() });
        }
        if ask.is_none() {
            details.push(ViolationDetail::NotOverDomain { index, side: Side::Ask, id: t.ask_id() });
        }
        let (Some(b), Some(a)) = (bid, ask) else {
            continue;
        };
        if !is_tradable(b, a) {
            details.push(ViolationDetail::NotTradable {
                index,
                bid_id: t.bid_id(),
                ask_id: t.ask_id(),
            });
        } else if t.price() < a.price() || t.price() > b.price() {
            details.push(ViolationDetail::PriceOutOfRange {
                index,
                bid_id: t.bid_id(),
                ask_id: t.ask_id(),
                price: t.price(),
            });
        }
    }
    for (id, traded) in m.bid_quantities() {
        if let Some(b) = bids.get(&id) {
            if traded > b.quantity() as u128 {
                details.push(ViolationDetail::QuantityExceeded {
                    side: Side::Bid,
                    id,
                    traded,
                    quantity: b.quantity(),
                });
            }
        }
    }
    for (id, traded) in m.ask_quantities() {
        if let Some(a) = asks.get(&id) {
            if traded > a.quantity() as u128 {
                details.push(ViolationDetail::QuantityExceeded {
                    side: Side::Ask,
                    id,
                    traded,
                    quantity: a.quantity(),
                });
            }
        }
    }
    Ok(details)
}

/// True when [`validate_matching`] finds nothing.
pub fn is_valid_matching(m: &Matching, d: &OrderDomain) -> Result<bool, Error> {
    validate_matching(m, d).map(|details| details.is_empty())
}

/// True when every transaction trades at one price. Vacuously true for
/// the empty matching.
pub fn is_uniform(m: &Matching) -> bool {
    match m.transactions().split_first() {
        None => true,
        Some((first, rest)) => rest.iter().all(|t| t.price() == first.price()),
    }
}

/// The first transaction that breaks price uniformity, if any.
pub fn uniformity_violation(m: &Matching) -> Option<ViolationDetail> {
    let first = m.transactions().first()?;
    m.transactions()
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, t)| t.price() != first.price())
        .map(|(index, t)| ViolationDetail::NonUniformPrice {
            index,
            price: t.price(),
            first_price: first.price(),
        })
}

/// Shared engine for both fairness sides. `orders` is one side of the
/// book sorted most-competitive-first; distinct (price, timestamp) pairs
/// are guaranteed by the admissibility fault in the callers, so sort
/// position is exactly strict competitiveness.
fn fairness_details(
    sorted: &[&Order],
    traded: &BTreeMap<u64, u128>,
    side: Side,
) -> Vec<ViolationDetail> {
    let traded_of = |o: &Order| traded.get(&o.id()).copied().unwrap_or(0);
    let Some(last_participant) = sorted.iter().rposition(|o| traded_of(o) > 0) else {
        return Vec::new();
    };
    let witness = sorted[last_participant];
    let mut details = Vec::new();
    for o in &sorted[..last_participant] {
        let got = traded_of(o);
        if got < o.quantity() as u128 {
            details.push(match side {
                Side::Bid => ViolationDetail::UnfairBid {
                    more_competitive: o.id(),
                    less_competitive: witness.id(),
                    traded: got,
                    quantity: o.quantity(),
                },
                Side::Ask => ViolationDetail::UnfairAsk {
                    more_competitive: o.id(),
                    less_competitive: witness.id(),
                    traded: got,
                    quantity: o.quantity(),
                },
            });
        }
    }
    details
}

/// Fairness on the bid side: whenever a bid participates, every strictly
/// more competitive bid is fully traded. Faults if the bids alone are
/// inadmissible.
pub fn validate_fair_bids(m: &Matching, bids: &[Order]) -> Result<Vec<ViolationDetail>, Error> {
    let issues = side_issues(bids, Side::Bid);
    if !issues.is_empty() {
        return Err(Error::Inadmissible(AdmissibilityReport { issues }));
    }
    let mut sorted: Vec<&Order> = bids.iter().collect();
    sorted.sort_by(|x, y| y.price().cmp(&x.price()).then(x.timestamp().cmp(&y.timestamp())));
    Ok(fairness_details(&sorted, &m.bid_quantities(), Side::Bid))
}

/// Fairness on the ask side; dual of [`validate_fair_bids`].
pub fn validate_fair_asks(m: &Matching, asks: &[Order]) -> Result<Vec<ViolationDetail>, Error> {
    let issues = side_issues(asks, Side::Ask);
    if !issues.is_empty() {
        return Err(Error::Inadmissible(AdmissibilityReport { issues }));
    }
    let mut sorted: Vec<&Order> = asks.iter().collect();
    sorted.sort_by(|x, y| x.price().cmp(&y.price()).then(x.timestamp().cmp(&y.timestamp())));
    Ok(fairness_details(&sorted, &m.ask_quantities(), Side::Ask))
}

pub fn is_fair_bids(m: &Matching, bids: &[Order]) -> Result<bool, Error> {
    validate_fair_bids(m, bids).map(|d| d.is_empty())
}

pub fn is_fair_asks(m: &Matching, asks: &[Order]) -> Result<bool, Error> {
    validate_fair_asks(m, asks).map(|d| d.is_empty())
}

/// Fairness findings on both sides of the book.
pub fn validate_fair(m: &Matching, d: &OrderDomain) -> Result<Vec<ViolationDetail>, Error> {
    require_admissible(d)?;
    let mut details = validate_fair_bids(m, &d.bids)?;
    details.extend(validate_fair_asks(m, &d.asks)?);
    Ok(details)
}

/// True when the matching is fair on both sides.
pub fn is_fair(m: &Matching, d: &OrderDomain) -> Result<bool, Error> {
    validate_fair(m, d).map(|details| details.is_empty())
}

/// The volume bound at one probe price: Vol(M) must not exceed
/// demand(B, p) + supply(A, p). Holds for every valid matching and every
/// price, so a false return marks a bug or invalid input.
pub fn demand_supply_bound_holds(m: &Matching, d: &OrderDomain, p: u128) -> Result<bool, Error> {
    require_admissible(d)?;
    Ok(m.vol() <= demand(&d.bids, p) + supply(&d.asks, p))
}

/// Probe prices where demand or supply can change: zero, every order
/// price, and one past the maximum.
pub fn candidate_prices(d: &OrderDomain) -> Vec<u128> {
    let mut prices: Vec<u128> = vec![0];
    prices.extend(d.bids.iter().chain(&d.asks).map(|o| o.price() as u128));
    if let Some(max) = d.bids.iter().chain(&d.asks).map(|o| o.price() as u128).max() {
        prices.push(max + 1);
    }
    prices.sort_unstable();
    prices.dedup();
    prices
}

/// Scans the volume bound across every candidate price; a nonempty
/// result names prices where it fails, which no valid matching can do.
pub fn bound_violations(m: &Matching, d: &OrderDomain) -> Result<Vec<ViolationDetail>, Error> {
    require_admissible(d)?;
    let volume = m.vol();
    let (bid_prices, bid_cum) = price_cumulative(&d.bids);
    let (ask_prices, ask_cum) = price_cumulative(&d.asks);
    let bid_total = bid_cum.last().copied().unwrap_or(0);

    let mut details = Vec::new();
    for p in candidate_prices(d) {
        // Demand is everything not strictly below p; supply everything at or below.
        let below = bid_prices.partition_point(|&x| x < p);
        let demand_at = bid_total - if below == 0 { 0 } else { bid_cum[below - 1] };
        let at_or_below = ask_prices.partition_point(|&x| x <= p);
        let supply_at = if at_or_below == 0 { 0 } else { ask_cum[at_or_below - 1] };
        let bound = demand_at + supply_at;
        if volume > bound {
            details.push(ViolationDetail::BoundExceeded { price: p, volume, bound });
        }
    }
    Ok(details)
}

/// Prices sorted ascending with cumulative quantities alongside.
fn price_cumulative(orders: &[Order]) -> (Vec<u128>, Vec<u128>) {
    let mut entries: Vec<(u128, u128)> = orders
        .iter()
        .map(|o| (o.price() as u128, o.quantity() as u128))
        .collect();
    entries.sort_unstable_by_key(|e| e.0);
    let prices: Vec<u128> = entries.iter().map(|e| e.0).collect();
    let mut cum = Vec::with_capacity(entries.len());
    let mut acc = 0u128;
    for e in &entries {
        acc += e.1;
        cum.push(acc);
    }
    (prices, cum)
}
