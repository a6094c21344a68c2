//! The matching engines: the core match loop, the fairness rewrites FOA
//! and FOB, their composition, and the uniform-price and maximum-volume
//! auction algorithms.

use crate::error::Error;
use crate::order::{vol_orders, Matching, Order, OrderDomain, Transaction};

/// The competitiveness sort a [`SortedBook`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortKind {
    BidsDescending,
    AsksDescending,
    AsksAscending,
}

/// A book tagged with the sort that produced it, so the match loop can
/// refuse books ordered the wrong way.
#[derive(Debug, Clone)]
pub struct SortedBook {
    kind: SortKind,
    orders: Vec<Order>,
}

impl SortedBook {
    /// Bids from most to least competitive: price descending, earlier
    /// timestamps first within a price level.
    pub fn bids_descending(mut orders: Vec<Order>) -> Self {
        // (price, timestamp) is tie-free on admissible books, so an
        // unstable sort is deterministic and avoids the merge buffer.
        orders.sort_unstable_by(|x, y| y.price.cmp(&x.price).then(x.timestamp.cmp(&y.timestamp)));
        SortedBook { kind: SortKind::BidsDescending, orders }
    }

    /// Asks from most to least competitive: price ascending, earlier
    /// timestamps first within a price level.
    pub fn asks_descending(mut orders: Vec<Order>) -> Self {
        orders.sort_unstable_by(|x, y| x.price.cmp(&y.price).then(x.timestamp.cmp(&y.timestamp)));
        SortedBook { kind: SortKind::AsksDescending, orders }
    }

    /// Asks from least to most competitive: price descending, later
    /// timestamps first within a price level.
    pub fn asks_ascending(mut orders: Vec<Order>) -> Self {
        orders.sort_unstable_by(|x, y| y.price.cmp(&x.price).then(y.timestamp.cmp(&x.timestamp)));
        SortedBook { kind: SortKind::AsksAscending, orders }
    }

    pub fn kind(&self) -> SortKind {
        self.kind
    }

    pub fn orders(&self) -> &[Order] {
        &self.orders
    }
}

/// Core price-time matching loop. Walks both books front to back: a
/// non-tradable head pair deletes the ask, a tradable one trades the
/// smaller remaining quantity at the ask's limit price and keeps any
/// leftover at the front.
///
/// `bids` must carry the `BidsDescending` sort. `asks` may carry either
/// ask sort: descending for the uniform-price auction, ascending for
/// maximum volume. `init` seeds the output transaction list.
pub fn match_subroutine(
    bids: &SortedBook,
    asks: &SortedBook,
    init: Matching,
) -> Result<Matching, Error> {
    if bids.kind() != SortKind::BidsDescending {
        return Err(Error::WrongSort { expected: "BidsDescending", found: bids.kind() });
    }
    if asks.kind() == SortKind::BidsDescending {
        return Err(Error::WrongSort {
            expected: "AsksDescending or AsksAscending",
            found: asks.kind(),
        });
    }
    let bid_book = bids.orders();
    let ask_book = asks.orders();
    let mut out = init.into_transactions();
    let mut bi = 0;
    let mut ai = 0;
    let mut bid_rem = bid_book.first().map_or(0, |o| o.quantity);
    let mut ask_rem = ask_book.first().map_or(0, |o| o.quantity);
    while bi < bid_book.len() && ai < ask_book.len() {
        let b = &bid_book[bi];
        let a = &ask_book[ai];
        if b.price < a.price {
            // The best remaining bid cannot afford this ask; no later
            // bid can either, so the ask is deleted outright.
            ai += 1;
            if ai < ask_book.len() {
                ask_rem = ask_book[ai].quantity;
            }
        } else {
            let q = bid_rem.min(ask_rem);
            out.push(Transaction { bid_id: b.id, ask_id: a.id, quantity: q, price: a.price });
            bid_rem -= q;
            ask_rem -= q;
            if bid_rem == 0 {
                bi += 1;
                if bi < bid_book.len() {
                    bid_rem = bid_book[bi].quantity;
                }
            }
            if ask_rem == 0 {
                ai += 1;
                if ai < ask_book.len() {
                    ask_rem = ask_book[ai].quantity;
                }
            }
        }
    }
    Ok(Matching::new(out))
}

/// Rewrites `m` so the most competitive asks absorb the traded volume.
/// Every transaction keeps its bid id and price; only ask ids change,
/// splitting quantities where ask sizes differ. Faults unless the ask
/// book can absorb the whole matched volume.
pub fn foa(m: &Matching, asks: &[Order]) -> Result<Matching, Error> {
    foa_with_observer(m, asks, None)
}

/// [`foa`] with a debug hook. The hook observes the remaining worklists
/// (pending transactions, unconsumed asks, both with the partially
/// consumed head adjusted) at the top of every loop iteration. Snapshot
/// construction is skipped entirely when no hook is given.
pub fn foa_with_observer(
    m: &Matching,
    asks: &[Order],
    mut observer: Option<&mut dyn FnMut(&[Transaction], &[Order])>,
) -> Result<Matching, Error> {
    let matched = m.vol();
    let available = vol_orders(asks);
    if matched > available {
        return Err(Error::SupplyExceeded { matched, available });
    }
    let mut txs = m.transactions().to_vec();
    txs.sort_by_cached_key(|t| t.price);
    let mut ask_book = asks.to_vec();
    ask_book.sort_unstable_by(|x, y| x.price.cmp(&y.price).then(x.timestamp.cmp(&y.timestamp)));

    // Each output fragment exhausts a transaction or an ask, so the
    // result never outgrows this capacity.
    let mut out = Vec::with_capacity(txs.len() + ask_book.len());
    let mut ti = 0;
    let mut ai = 0;
    let mut tx_rem = txs.first().map_or(0, |t| t.quantity);
    let mut ask_rem = ask_book.first().map_or(0, |a| a.quantity);
    while ti < txs.len() {
        if let Some(hook) = observer.as_deref_mut() {
            hook(
                &adjusted_tail_txs(&txs, ti, tx_rem),
                &adjusted_tail_orders(&ask_book, ai, ask_rem),
            );
        }
        let t = &txs[ti];
        // The volume precondition keeps the ask book ahead of the
        // transactions, so this index never runs off the end.
        let a = &ask_book[ai];
        let q = tx_rem.min(ask_rem);
        out.push(Transaction { bid_id: t.bid_id, ask_id: a.id, quantity: q, price: t.price });
        tx_rem -= q;
        ask_rem -= q;
        if tx_rem == 0 {
            ti += 1;
            if ti < txs.len() {
                tx_rem = txs[ti].quantity;
            }
        }
        if ask_rem == 0 {
            ai += 1;
            if ai < ask_book.len() {
                ask_rem = ask_book[ai].quantity;
            }
        }
    }
    Ok(Matching::new(out))
}

/// Bid-side dual of [`foa`]: transactions are consumed from the highest
/// price down and rewritten onto the most competitive bids. Ask ids and
/// prices survive. Faults unless the bid book can absorb the volume.
pub fn fob(m: &Matching, bids: &[Order]) -> Result<Matching, Error> {
    let matched = m.vol();
    let available = vol_orders(bids);
    if matched > available {
        return Err(Error::DemandExceeded { matched, available });
    }
    let mut txs = m.transactions().to_vec();
    txs.sort_by_cached_key(|t| std::cmp::Reverse(t.price));
    let mut bid_book = bids.to_vec();
    bid_book.sort_unstable_by(|x, y| y.price.cmp(&x.price).then(x.timestamp.cmp(&y.timestamp)));

    let mut out = Vec::with_capacity(txs.len() + bid_book.len());
    let mut ti = 0;
    let mut bi = 0;
    let mut tx_rem = txs.first().map_or(0, |t| t.quantity);
    let mut bid_rem = bid_book.first().map_or(0, |b| b.quantity);
    while ti < txs.len() {
        let t = &txs[ti];
        let b = &bid_book[bi];
        let q = tx_rem.min(bid_rem);
        out.push(Transaction { bid_id: b.id, ask_id: t.ask_id, quantity: q, price: t.price });
        tx_rem -= q;
        bid_rem -= q;
        if tx_rem == 0 {
            ti += 1;
            if ti < txs.len() {
                tx_rem = txs[ti].quantity;
            }
        }
        if bid_rem == 0 {
            bi += 1;
            if bi < bid_book.len() {
                bid_rem = bid_book[bi].quantity;
            }
        }
    }
    Ok(Matching::new(out))
}

fn adjusted_tail_txs(txs: &[Transaction], i: usize, rem: u64) -> Vec<Transaction> {
    let mut tail = txs[i..].to_vec();
    if let Some(head) = tail.first_mut() {
        head.quantity = rem;
    }
    tail
}

fn adjusted_tail_orders(book: &[Order], i: usize, rem: u64) -> Vec<Order> {
    if i >= book.len() {
        return Vec::new();
    }
    let mut tail = book[i..].to_vec();
    tail[0].quantity = rem;
    tail
}

/// Makes any valid matching fair on both sides without changing its
/// volume: FOB for the bids, then FOA for the asks. FOA preserves
/// per-bid totals, so the bid-side fairness established first survives.
pub fn fair(m: &Matching, d: &OrderDomain) -> Result<Matching, Error> {
    let report = d.check_admissible();
    if !report.is_admissible() {
        return Err(Error::Inadmissible(report));
    }
    let fair_on_bids = fob(m, &d.bids)?;
    foa(&fair_on_bids, &d.asks)
}

/// Uniform-price auction: match both books in competitiveness order and
/// clear every trade at the last transaction's price. An empty result
/// means no clearing price exists.
pub fn um(d: &OrderDomain) -> Result<Matching, Error> {
    let report = d.check_admissible();
    if !report.is_admissible() {
        return Err(Error::Inadmissible(report));
    }
    let bids = SortedBook::bids_descending(d.bids.clone());
    let asks = SortedBook::asks_descending(d.asks.clone());
    let m = match_subroutine(&bids, &asks, Matching::default())?;
    match m.transactions().last() {
        None => Ok(m),
        Some(last) => {
            let p = last.price;
            Ok(assign_price(p, m))
        }
    }
}

/// Maximum-volume auction: match the bids against the asks in reverse
/// competitiveness order, then restore ask-side fairness with FOA.
pub fn mm(d: &OrderDomain) -> Result<Matching, Error> {
    let report = d.check_admissible();
    if !report.is_admissible() {
        return Err(Error::Inadmissible(report));
    }
    let bids = SortedBook::bids_descending(d.bids.clone());
    let asks = SortedBook::asks_ascending(d.asks.clone());
    let m = match_subroutine(&bids, &asks, Matching::default())?;
    foa(&m, &d.asks)
}

/// Replaces every transaction's price, leaving pairs and quantities.
pub fn assign_price(p: u64, m: Matching) -> Matching {
    let mut txs = m.into_transactions();
    for t in &mut txs {
        t.price = p;
    }
    Matching::new(txs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{demand, supply, vol_orders};
    use crate::properties::{is_fair, is_uniform, is_valid_matching};
    use proptest::prelude::*;

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

    #[test]
    fn sorts_follow_their_comparators() {
        let asks = vec![order(1, 3, 1, 70), order(2, 4, 1, 90)];
        let desc = SortedBook::asks_descending(asks.clone());
        assert_eq!(desc.orders()[0].id(), 1);
        let asc = SortedBook::asks_ascending(asks);
        assert_eq!(asc.orders()[0].id(), 2);
        let bids = SortedBook::bids_descending(vec![order(2, 2, 1, 85), order(1, 1, 1, 100)]);
        assert_eq!(bids.orders()[0].id(), 1);
    }

    #[test]
    fn match_with_both_descending() {
        let d = crossed_book();
        let m = match_subroutine(
            &SortedBook::bids_descending(d.bids.clone()),
            &SortedBook::asks_descending(d.asks.clone()),
            Matching::default(),
        )
        .unwrap();
        assert_eq!(m.transactions(), &[tx(1, 1, 1, 70)]);
    }

    #[test]
    fn match_with_asks_ascending_doubles_volume() {
        let d = crossed_book();
        let m = match_subroutine(
            &SortedBook::bids_descending(d.bids.clone()),
            &SortedBook::asks_ascending(d.asks.clone()),
            Matching::default(),
        )
        .unwrap();
        assert_eq!(m.transactions(), &[tx(1, 2, 1, 90), tx(2, 1, 1, 70)]);
        assert_eq!(m.vol(), 2);
    }

    #[test]
    fn match_empty_book_is_empty() {
        let m = match_subroutine(
            &SortedBook::bids_descending(vec![]),
            &SortedBook::asks_descending(vec![order(1, 1, 1, 10)]),
            Matching::default(),
        )
        .unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn match_rejects_wrong_sort() {
        let bids = SortedBook::asks_descending(vec![]);
        let asks = SortedBook::asks_descending(vec![]);
        assert!(matches!(
            match_subroutine(&bids, &asks, Matching::default()),
            Err(Error::WrongSort { .. })
        ));
        let bids = SortedBook::bids_descending(vec![]);
        let not_asks = SortedBook::bids_descending(vec![]);
        assert!(matches!(
            match_subroutine(&bids, &not_asks, Matching::default()),
            Err(Error::WrongSort { .. })
        ));
    }

    #[test]
    fn foa_moves_volume_to_better_ask() {
        let asks = vec![order(1, 3, 1, 70), order(2, 4, 1, 90)];
        let m = Matching::new(vec![tx(1, 2, 1, 95)]);
        let out = foa(&m, &asks).unwrap();
        assert_eq!(out.transactions(), &[tx(1, 1, 1, 95)]);
    }

    #[test]
    fn foa_empty_is_empty() {
        assert!(foa(&Matching::default(), &[]).unwrap().is_empty());
    }

    #[test]
    fn foa_faults_when_asks_cannot_absorb() {
        let asks = vec![order(1, 3, 1, 70)];
        let m = Matching::new(vec![tx(1, 1, 2, 80)]);
        assert_eq!(
            foa(&m, &asks),
            Err(Error::SupplyExceeded { matched: 2, available: 1 })
        );
    }

    #[test]
    fn fob_moves_volume_to_better_bid() {
        let bids = vec![order(1, 1, 1, 100), order(2, 2, 1, 85)];
        let m = Matching::new(vec![tx(2, 1, 1, 80)]);
        let out = fob(&m, &bids).unwrap();
        assert_eq!(out.transactions(), &[tx(1, 1, 1, 80)]);
    }

    #[test]
    fn fob_faults_when_bids_cannot_absorb() {
        let bids = vec![order(1, 1, 1, 100)];
        let m = Matching::new(vec![tx(1, 1, 2, 80)]);
        assert_eq!(
            fob(&m, &bids),
            Err(Error::DemandExceeded { matched: 2, available: 1 })
        );
    }

    #[test]
    fn fair_preserves_already_fair_quantities() {
        let d = crossed_book();
        let m = mm(&d).unwrap();
        let rewritten = fair(&m, &d).unwrap();
        assert_eq!(rewritten.bid_quantities(), m.bid_quantities());
        assert_eq!(rewritten.ask_quantities(), m.ask_quantities());
        assert!(fair(&Matching::default(), &d).unwrap().is_empty());
    }

    #[test]
    fn uniform_auction_on_crossed_book() {
        let d = crossed_book();
        let m = um(&d).unwrap();
        assert_eq!(m.transactions(), &[tx(1, 1, 1, 70)]);
        assert_eq!(m.vol(), 1);
        assert!(is_uniform(&m));
        assert!(is_fair(&m, &d).unwrap());
        assert!(is_valid_matching(&m, &d).unwrap());
    }

    #[test]
    fn uniform_auction_without_cross_is_empty() {
        let d = OrderDomain::new(
            vec![order(1, 1, 1, 10), order(2, 2, 1, 20)],
            vec![order(1, 3, 1, 30), order(2, 4, 1, 40)],
        );
        assert!(um(&d).unwrap().is_empty());
    }

    #[test]
    fn uniform_auction_fills_equal_price_book() {
        let d = equal_price_book();
        let m = um(&d).unwrap();
        assert_eq!(m.vol(), 3);
        assert!(m.transactions().iter().all(|t| t.price() == 50));
    }

    #[test]
    fn maximum_auction_on_crossed_book() {
        let d = crossed_book();
        let m = mm(&d).unwrap();
        assert_eq!(m.vol(), 2);
        assert!(is_fair(&m, &d).unwrap());
        assert!(is_valid_matching(&m, &d).unwrap());
        assert!(m.vol() > um(&d).unwrap().vol());
    }

    #[test]
    fn maximum_auction_single_pair() {
        let d = OrderDomain::new(vec![order(1, 1, 5, 10)], vec![order(1, 2, 3, 10)]);
        let m = mm(&d).unwrap();
        assert_eq!(m.transactions(), &[tx(1, 1, 3, 10)]);
    }

    #[test]
    fn auctions_fault_on_inadmissible_books() {
        let d = OrderDomain::new(vec![order(1, 1, 1, 10), order(1, 2, 1, 10)], vec![]);
        assert!(matches!(um(&d), Err(Error::Inadmissible(_))));
        assert!(matches!(mm(&d), Err(Error::Inadmissible(_))));
        assert!(matches!(fair(&Matching::default(), &d), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn assign_price_rewrites_prices_only() {
        assert!(assign_price(5, Matching::default()).is_empty());
        let m = Matching::new(vec![tx(1, 1, 1, 70)]);
        assert_eq!(assign_price(70, m.clone()), m);

        let d = crossed_book();
        let raw = match_subroutine(
            &SortedBook::bids_descending(d.bids.clone()),
            &SortedBook::asks_descending(d.asks.clone()),
            Matching::default(),
        )
        .unwrap();
        let priced = assign_price(70, raw);
        assert!(is_valid_matching(&priced, &d).unwrap());
    }

    prop_compose! {
        fn arb_side(max_len: usize)
            (entries in prop::collection::vec((1u64..=10, 1u64..=60), 0..=max_len))
            (shuffled in Just((0..entries.len() as u64).collect::<Vec<_>>()).prop_shuffle(),
             entries in Just(entries))
            -> Vec<Order>
        {
            entries
                .iter()
                .zip(&shuffled)
                .enumerate()
                .map(|(i, (&(qty, price), &ts))| order(i as u64 + 1, ts, qty, price))
                .collect()
        }
    }

    prop_compose! {
        fn flat_side(max_len: usize)
            (entries in prop::collection::vec(1u64..=10, 0..=max_len))
            (shuffled in Just((0..entries.len() as u64).collect::<Vec<_>>()).prop_shuffle(),
             entries in Just(entries))
            -> Vec<Order>
        {
            // Every order at one price: the adversarial tie case.
            entries
                .iter()
                .zip(&shuffled)
                .enumerate()
                .map(|(i, (&qty, &ts))| order(i as u64 + 1, ts, qty, 40))
                .collect()
        }
    }

    fn arb_domain() -> impl Strategy<Value = OrderDomain> {
        (arb_side(10), arb_side(10)).prop_map(|(b, a)| OrderDomain::new(b, a))
    }

    fn flat_domain() -> impl Strategy<Value = OrderDomain> {
        (flat_side(10), flat_side(10)).prop_map(|(b, a)| OrderDomain::new(b, a))
    }

    proptest! {
        #[test]
        fn uniform_auction_contract(d in arb_domain()) {
            let m = um(&d).unwrap();
            prop_assert!(is_uniform(&m));
            prop_assert!(is_fair(&m, &d).unwrap());
            prop_assert!(is_valid_matching(&m, &d).unwrap());
        }

        #[test]
        fn maximum_auction_contract(d in arb_domain()) {
            let m = mm(&d).unwrap();
            prop_assert!(is_fair(&m, &d).unwrap());
            prop_assert!(is_valid_matching(&m, &d).unwrap());
            prop_assert!(m.vol() >= um(&d).unwrap().vol());
        }

        #[test]
        fn transaction_count_stays_linear(d in arb_domain()) {
            // Matching emits at most one transaction per consumed order,
            // and the fairness rewrite can split each across asks, so the
            // count stays within |B| + 2|A|.
            let m = mm(&d).unwrap();
            prop_assert!(m.len() <= d.bids.len() + 2 * d.asks.len());
        }

        #[test]
        fn foa_preserves_volume_and_bid_totals(d in arb_domain()) {
            let m = um(&d).unwrap();
            let out = foa(&m, &d.asks).unwrap();
            prop_assert_eq!(out.vol(), m.vol());
            prop_assert_eq!(out.bid_quantities(), m.bid_quantities());
            prop_assert!(crate::properties::is_fair_asks(&out, &d.asks).unwrap());
        }

        #[test]
        fn fob_preserves_volume_and_ask_totals(d in arb_domain()) {
            let m = um(&d).unwrap();
            let out = fob(&m, &d.bids).unwrap();
            prop_assert_eq!(out.vol(), m.vol());
            prop_assert_eq!(out.ask_quantities(), m.ask_quantities());
            prop_assert!(crate::properties::is_fair_bids(&out, &d.bids).unwrap());
        }

        #[test]
        fn rewrites_hold_under_full_ties(d in flat_domain()) {
            let m = um(&d).unwrap();
            let a = foa(&m, &d.asks).unwrap();
            prop_assert_eq!(a.vol(), m.vol());
            prop_assert_eq!(a.bid_quantities(), m.bid_quantities());
            let b = fob(&m, &d.bids).unwrap();
            prop_assert_eq!(b.vol(), m.vol());
            prop_assert_eq!(b.ask_quantities(), m.ask_quantities());
        }

        #[test]
        fn composition_order_agrees_on_totals(d in arb_domain()) {
            let m = um(&d).unwrap();
            let ab = foa(&fob(&m, &d.bids).unwrap(), &d.asks).unwrap();
            let ba = fob(&foa(&m, &d.asks).unwrap(), &d.bids).unwrap();
            prop_assert_eq!(ab.bid_quantities(), ba.bid_quantities());
            prop_assert_eq!(ab.ask_quantities(), ba.ask_quantities());
        }

        #[test]
        fn foa_keeps_supply_ahead_of_pending_volume(d in arb_domain()) {
            // At every iteration the remaining asks must cover the
            // remaining transactions at or below each price level.
            let m = um(&d).unwrap();
            let mut checked = 0usize;
            let mut hook = |txs: &[Transaction], asks: &[Order]| {
                for t in txs {
                    let p = t.price() as u128;
                    let pending: u128 = txs
                        .iter()
                        .filter(|x| x.price() <= t.price())
                        .map(|x| x.quantity() as u128)
                        .sum();
                    assert!(supply(asks, p) >= pending, "supply fell behind at price {p}");
                }
                checked += 1;
            };
            foa_with_observer(&m, &d.asks, Some(&mut hook)).unwrap();
            prop_assert!(checked >= m.len());
        }

        #[test]
        fn volume_bounded_by_demand_plus_supply(d in arb_domain()) {
            let m = mm(&d).unwrap();
            for p in crate::properties::candidate_prices(&d) {
                prop_assert!(m.vol() <= demand(&d.bids, p) + supply(&d.asks, p));
            }
        }

        #[test]
        fn uniform_volume_never_beats_maximum(d in arb_domain()) {
            prop_assert!(um(&d).unwrap().vol() <= mm(&d).unwrap().vol());
        }

        #[test]
        fn match_consumes_in_book_order(d in arb_domain()) {
            // Volume conservation: both sides account for the same total.
            let m = mm(&d).unwrap();
            let bid_sum: u128 = m.bid_quantities().values().sum();
            let ask_sum: u128 = m.ask_quantities().values().sum();
            prop_assert_eq!(bid_sum, m.vol());
            prop_assert_eq!(ask_sum, m.vol());
            prop_assert!(m.vol() <= vol_orders(&d.bids).min(vol_orders(&d.asks)));
        }
    }
}
