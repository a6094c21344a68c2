//! Trade-book compliance checking: replay a raw order feed into the
//! final book, compute the reference matching, and compare the
//! exchange's trades against it.
//!
//! The comparison never looks at who traded with whom. Equal-volume fair
//! matchings give every order the same traded total, so per-order totals
//! plus validity, volume, and (in uniform mode) price uniformity decide
//! compliance completely.

use std::collections::BTreeMap;

use crate::algorithms::{mm, um};
use crate::error::Error;
use crate::order::{AdmissibilityReport, Matching, Order, OrderDomain, Side};
use crate::properties::{
    bound_violations, is_uniform, uniformity_violation, validate_matching, ViolationDetail,
};

/// Price carried by a raw order event: a limit or the market sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventPrice {
    Limit(u64),
    Market,
}

/// Lifecycle action of a raw order event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    New,
    Update,
    Delete,
}

/// One row of an exchange's raw order feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawOrderEvent {
    pub id: u64,
    pub timestamp: u64,
    pub quantity: u64,
    pub price: EventPrice,
    pub side: Side,
    pub action: Action,
}

/// Findings from event replay that are not admissibility defects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreprocessIssue {
    /// UPDATE or DELETE for an id that is not live.
    UnknownId { side: Side, id: u64, action: Action, timestamp: u64 },
    /// NEW for an id that is already live; the later event wins.
    DuplicateNew { side: Side, id: u64, timestamp: u64 },
    /// An update stamped at the latest time in the feed, i.e. at the
    /// auction cut itself; replayed like any other update but flagged.
    LateUpdate { side: Side, id: u64, timestamp: u64 },
    /// NEW or UPDATE carrying quantity zero; the event is dropped.
    ZeroQuantity { side: Side, id: u64, timestamp: u64 },
}

/// Replay outcome: the final book plus everything suspicious found on
/// the way there.
#[derive(Debug, Clone)]
pub struct PreprocessOutcome {
    pub domain: OrderDomain,
    pub issues: Vec<PreprocessIssue>,
    pub admissibility: AdmissibilityReport,
}

/// Replays NEW/UPDATE/DELETE events in timestamp order (feed order for
/// ties) and keeps the final state of each live order, per side. Market
/// asks become price 0; market bids the maximum representable price. An
/// update carries its own timestamp into the book, so amended orders
/// lose their original time priority.
pub fn preprocess(events: &[RawOrderEvent]) -> PreprocessOutcome {
    let mut sorted: Vec<&RawOrderEvent> = events.iter().collect();
    sorted.sort_by_key(|e| e.timestamp);
    let max_ts = sorted.last().map(|e| e.timestamp);

    let mut live: BTreeMap<(Side, u64), (u64, u64, EventPrice)> = BTreeMap::new();
    let mut issues = Vec::new();
    for e in sorted {
        let key = (e.side, e.id);
        match e.action {
            Action::New => {
                if e.quantity == 0 {
                    issues.push(PreprocessIssue::ZeroQuantity {
                        side: e.side,
                        id: e.id,
                        timestamp: e.timestamp,
                    });
                    continue;
                }
                if live.contains_key(&key) {
                    issues.push(PreprocessIssue::DuplicateNew {
                        side: e.side,
                        id: e.id,
                        timestamp: e.timestamp,
                    });
                }
                live.insert(key, (e.timestamp, e.quantity, e.price));
            }
            Action::Update => {
                if !live.contains_key(&key) {
                    issues.push(PreprocessIssue::UnknownId {
                        side: e.side,
                        id: e.id,
                        action: Action::Update,
                        timestamp: e.timestamp,
                    });
                    continue;
                }
                if e.quantity == 0 {
                    issues.push(PreprocessIssue::ZeroQuantity {
                        side: e.side,
                        id: e.id,
                        timestamp: e.timestamp,
                    });
                    continue;
                }
                if Some(e.timestamp) == max_ts {
                    issues.push(PreprocessIssue::LateUpdate {
                        side: e.side,
                        id: e.id,
                        timestamp: e.timestamp,
                    });
                }
                live.insert(key, (e.timestamp, e.quantity, e.price));
            }
            Action::Delete => {
                if live.remove(&key).is_none() {
                    issues.push(PreprocessIssue::UnknownId {
                        side: e.side,
                        id: e.id,
                        action: Action::Delete,
                        timestamp: e.timestamp,
                    });
                }
            }
        }
    }

    let mut bids = Vec::new();
    let mut asks = Vec::new();
    for ((side, id), (timestamp, quantity, price)) in live {
        let limit = match (price, side) {
            (EventPrice::Limit(p), _) => p,
            (EventPrice::Market, Side::Ask) => 0,
            (EventPrice::Market, Side::Bid) => u64::MAX,
        };
        let order = Order::new(id, timestamp, quantity, limit)
            .expect("zero quantities are filtered during replay");
        match side {
            Side::Bid => bids.push(order),
            Side::Ask => asks.push(order),
        }
    }
    bids.sort_by_key(|o| o.timestamp());
    asks.sort_by_key(|o| o.timestamp());
    let domain = OrderDomain::new(bids, asks);
    let admissibility = domain.check_admissible();
    PreprocessOutcome { domain, issues, admissibility }
}

/// Which reference algorithm the trade book is audited against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Uniform,
    Maximum,
}

/// Checker verdict for one instrument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Compliant,
    Violation,
}

/// One order whose traded total differs from the reference outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discrepancy {
    pub side: Side,
    pub id: u64,
    pub qty_reference: u128,
    pub qty_exchange: u128,
}

/// Full audit result for one instrument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub mode: Mode,
    pub uniform: bool,
    pub volume_reference: u128,
    pub volume_exchange: u128,
    pub discrepancies: Vec<Discrepancy>,
    pub validity_details: Vec<ViolationDetail>,
}

impl CheckReport {
    /// The exact verdict line the checker prints.
    pub fn verdict_line(&self) -> &'static str {
        match self.verdict {
            Verdict::Compliant => "Matching does not violate the guidelines",
            Verdict::Violation => "Violation detected!",
        }
    }
}

/// Audits an exchange's trade book against the reference matching for
/// the final book. A violation is any of: the book is invalid over the
/// domain, uniform mode sees mixed prices, total volume differs from
/// the reference, or some order's traded total differs. Faults only if
/// the domain itself is inadmissible.
pub fn check_tradebook(
    d: &OrderDomain,
    exchange: &Matching,
    mode: Mode,
) -> Result<CheckReport, Error> {
    let reference = match mode {
        Mode::Uniform => um(d)?,
        Mode::Maximum => mm(d)?,
    };
    let mut validity_details = validate_matching(exchange, d)?;
    validity_details.extend(bound_violations(exchange, d)?);
    let uniform = is_uniform(exchange);
    if mode == Mode::Uniform {
        if let Some(detail) = uniformity_violation(exchange) {
            validity_details.push(detail);
        }
    }

    let mut discrepancies = Vec::new();
    diff_side(&reference.bid_quantities(), &exchange.bid_quantities(), Side::Bid, &mut discrepancies);
    diff_side(&reference.ask_quantities(), &exchange.ask_quantities(), Side::Ask, &mut discrepancies);

    let volume_reference = reference.vol();
    let volume_exchange = exchange.vol();
    let compliant = validity_details.is_empty()
        && volume_reference == volume_exchange
        && discrepancies.is_empty()
        && (mode == Mode::Maximum || uniform);
    Ok(CheckReport {
        verdict: if compliant { Verdict::Compliant } else { Verdict::Violation },
        mode,
        uniform,
        volume_reference,
        volume_exchange,
        discrepancies,
        validity_details,
    })
}

fn diff_side(
    reference: &BTreeMap<u64, u128>,
    exchange: &BTreeMap<u64, u128>,
    side: Side,
    out: &mut Vec<Discrepancy>,
) {
    let ids: std::collections::BTreeSet<u64> =
        reference.keys().chain(exchange.keys()).copied().collect();
    for id in ids {
        let qty_reference = reference.get(&id).copied().unwrap_or(0);
        let qty_exchange = exchange.get(&id).copied().unwrap_or(0);
        if qty_reference != qty_exchange {
            out.push(Discrepancy { side, id, qty_reference, qty_exchange });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::Transaction;

    fn order(id: u64, ts: u64, qty: u64, price: u64) -> Order {
        Order::new(id, ts, qty, price).unwrap()
    }

    fn tx(bid: u64, ask: u64, qty: u64, price: u64) -> Transaction {
        Transaction::new(bid, ask, qty, price).unwrap()
    }

    fn crossed_book() -> OrderDomain {
        OrderDomain::new(
            vec![order(1, 1, 1, 100), order(2, 2, 1, 85)],
            vec![order(1, 3, 1, 70), order(2, 4, 1, 90)],
        )
    }

    fn equal_price_book() -> OrderDomain {
        OrderDomain::new(
            vec![order(1, 1, 1, 50), order(2, 2, 2, 50)],
            vec![order(1, 3, 1, 50), order(2, 4, 2, 50)],
        )
    }

    fn event(
        id: u64,
        ts: u64,
        qty: u64,
        price: EventPrice,
        side: Side,
        action: Action,
    ) -> RawOrderEvent {
        RawOrderEvent { id, timestamp: ts, quantity: qty, price, side, action }
    }

    #[test]
    fn update_wins_over_new() {
        let events = vec![
            event(1, 10, 5, EventPrice::Limit(100), Side::Bid, Action::New),
            event(1, 20, 3, EventPrice::Limit(110), Side::Bid, Action::Update),
            event(9, 30, 1, EventPrice::Limit(50), Side::Ask, Action::New),
        ];
        let out = preprocess(&events);
        assert!(out.issues.is_empty());
        assert_eq!(out.domain.bids, vec![order(1, 20, 3, 110)]);
        assert_eq!(out.domain.asks, vec![order(9, 30, 1, 50)]);
        assert!(out.admissibility.is_admissible());
    }

    #[test]
    fn market_orders_get_sentinel_limits() {
        let events = vec![
            event(1, 1, 2, EventPrice::Market, Side::Ask, Action::New),
            event(1, 2, 2, EventPrice::Market, Side::Bid, Action::New),
        ];
        let out = preprocess(&events);
        assert_eq!(out.domain.asks[0].price(), 0);
        assert_eq!(out.domain.bids[0].price(), u64::MAX);
    }

    #[test]
    fn delete_removes_order() {
        let events = vec![
            event(2, 1, 1, EventPrice::Limit(50), Side::Bid, Action::New),
            event(2, 2, 0, EventPrice::Limit(0), Side::Bid, Action::Delete),
        ];
        let out = preprocess(&events);
        assert!(out.domain.bids.is_empty());
        assert!(out.issues.is_empty());
    }

    #[test]
    fn unknown_targets_reported() {
        let events = vec![
            event(7, 1, 1, EventPrice::Limit(50), Side::Ask, Action::Update),
            event(8, 2, 0, EventPrice::Limit(0), Side::Bid, Action::Delete),
        ];
        let out = preprocess(&events);
        assert_eq!(out.issues.len(), 2);
        assert!(matches!(out.issues[0], PreprocessIssue::UnknownId { id: 7, .. }));
        assert!(matches!(out.issues[1], PreprocessIssue::UnknownId { id: 8, .. }));
    }

    #[test]
    fn duplicate_new_keeps_latest() {
        let events = vec![
            event(1, 1, 1, EventPrice::Limit(50), Side::Bid, Action::New),
            event(1, 5, 2, EventPrice::Limit(60), Side::Bid, Action::New),
        ];
        let out = preprocess(&events);
        assert!(matches!(out.issues[0], PreprocessIssue::DuplicateNew { id: 1, .. }));
        assert_eq!(out.domain.bids, vec![order(1, 5, 2, 60)]);
    }

    #[test]
    fn update_at_feed_end_is_flagged() {
        let events = vec![
            event(1, 1, 1, EventPrice::Limit(50), Side::Bid, Action::New),
            event(2, 2, 1, EventPrice::Limit(55), Side::Bid, Action::New),
            event(1, 2, 2, EventPrice::Limit(60), Side::Bid, Action::Update),
        ];
        let out = preprocess(&events);
        assert!(out
            .issues
            .iter()
            .any(|i| matches!(i, PreprocessIssue::LateUpdate { id: 1, timestamp: 2, .. })));
        // The replayed book now has two bids at timestamp 2.
        assert!(!out.admissibility.is_admissible());
    }

    #[test]
    fn replay_is_timestamp_ordered() {
        // The update arrives before the new in feed order but later by
        // timestamp, so it must still win.
        let events = vec![
            event(1, 30, 9, EventPrice::Limit(99), Side::Ask, Action::Update),
            event(1, 10, 5, EventPrice::Limit(80), Side::Ask, Action::New),
        ];
        let out = preprocess(&events);
        assert_eq!(out.domain.asks, vec![order(1, 30, 9, 99)]);
    }

    #[test]
    fn compliant_uniform_book() {
        let d = crossed_book();
        let book = Matching::new(vec![tx(1, 1, 1, 70)]);
        let report = check_tradebook(&d, &book, Mode::Uniform).unwrap();
        assert_eq!(report.verdict, Verdict::Compliant);
        assert_eq!(report.verdict_line(), "Matching does not violate the guidelines");
        assert_eq!(report.volume_reference, 1);
        assert_eq!(report.volume_exchange, 1);
        assert!(report.discrepancies.is_empty());
    }

    #[test]
    fn wrong_bid_is_a_discrepancy() {
        let d = crossed_book();
        let book = Matching::new(vec![tx(2, 1, 1, 70)]);
        let report = check_tradebook(&d, &book, Mode::Uniform).unwrap();
        assert_eq!(report.verdict, Verdict::Violation);
        assert_eq!(report.verdict_line(), "Violation detected!");
        assert_eq!(
            report.discrepancies,
            vec![
                Discrepancy { side: Side::Bid, id: 1, qty_reference: 1, qty_exchange: 0 },
                Discrepancy { side: Side::Bid, id: 2, qty_reference: 0, qty_exchange: 1 },
            ]
        );
    }

    #[test]
    fn different_pairing_same_totals_is_compliant() {
        let d = equal_price_book();
        let split = Matching::new(vec![tx(1, 2, 1, 50), tx(2, 2, 1, 50), tx(2, 1, 1, 50)]);
        let report = check_tradebook(&d, &split, Mode::Uniform).unwrap();
        assert_eq!(report.verdict, Verdict::Compliant);
    }

    #[test]
    fn missing_volume_is_a_violation() {
        let d = equal_price_book();
        let short = Matching::new(vec![tx(1, 1, 1, 50)]);
        let report = check_tradebook(&d, &short, Mode::Uniform).unwrap();
        assert_eq!(report.verdict, Verdict::Violation);
        assert_ne!(report.volume_reference, report.volume_exchange);
    }

    #[test]
    fn mixed_prices_fail_uniform_mode_only() {
        let d = crossed_book();
        let mixed = Matching::new(vec![tx(1, 2, 1, 90), tx(2, 1, 1, 70)]);
        let uniform = check_tradebook(&d, &mixed, Mode::Uniform).unwrap();
        assert_eq!(uniform.verdict, Verdict::Violation);
        assert!(!uniform.uniform);
        let maximum = check_tradebook(&d, &mixed, Mode::Maximum).unwrap();
        assert_eq!(maximum.verdict, Verdict::Compliant);
        assert!(!maximum.uniform);
    }

    #[test]
    fn unknown_trade_ids_are_violations_not_faults() {
        let d = crossed_book();
        let book = Matching::new(vec![tx(9, 9, 1, 70)]);
        let report = check_tradebook(&d, &book, Mode::Uniform).unwrap();
        assert_eq!(report.verdict, Verdict::Violation);
        assert!(!report.validity_details.is_empty());
    }

    #[test]
    fn checker_faults_on_inadmissible_books() {
        let d = OrderDomain::new(vec![order(1, 1, 1, 10), order(1, 2, 1, 10)], vec![]);
        assert!(matches!(
            check_tradebook(&d, &Matching::default(), Mode::Uniform),
            Err(Error::Inadmissible(_))
        ));
    }

    #[test]
    fn maximum_mode_accepts_its_reference() {
        let d = crossed_book();
        let reference = mm(&d).unwrap();
        let report = check_tradebook(&d, &reference, Mode::Maximum).unwrap();
        assert_eq!(report.verdict, Verdict::Compliant);
    }
}
