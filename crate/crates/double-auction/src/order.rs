//! Core order-book types and the price-time priority relations.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::Error;

/// Which side of the book an order sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Bid,
    Ask,
}

impl Side {
    /// Single-letter form used by the CSV interchange files.
    pub fn letter(self) -> char {
        match self {
            Side::Bid => 'B',
            Side::Ask => 'A',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Bid => write!(f, "bid"),
            Side::Ask => write!(f, "ask"),
        }
    }
}

/// A limit order. `price` is in the smallest currency unit; `timestamp`
/// is in microseconds, lower meaning earlier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Order {
    pub(crate) id: u64,
    pub(crate) timestamp: u64,
    pub(crate) quantity: u64,
    pub(crate) price: u64,
}

impl Order {
    /// Builds an order; zero quantities are rejected.
    pub fn new(id: u64, timestamp: u64, quantity: u64, price: u64) -> Result<Self, Error> {
        if quantity == 0 {
            return Err(Error::ZeroQuantity);
        }
        Ok(Order { id, timestamp, quantity, price })
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }

    pub fn quantity(&self) -> u64 {
        self.quantity
    }

    pub fn price(&self) -> u64 {
        self.price
    }
}

/// One trade between a bid and an ask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transaction {
    pub(crate) bid_id: u64,
    pub(crate) ask_id: u64,
    pub(crate) quantity: u64,
    pub(crate) price: u64,
}

impl Transaction {
    /// Builds a transaction; zero quantities are rejected.
    pub fn new(bid_id: u64, ask_id: u64, quantity: u64, price: u64) -> Result<Self, Error> {
        if quantity == 0 {
            return Err(Error::ZeroQuantity);
        }
        Ok(Transaction { bid_id, ask_id, quantity, price })
    }

    pub fn bid_id(&self) -> u64 {
        self.bid_id
    }

    pub fn ask_id(&self) -> u64 {
        self.ask_id
    }

    pub fn quantity(&self) -> u64 {
        self.quantity
    }

    pub fn price(&self) -> u64 {
        self.price
    }
}

/// True when the bid's limit meets or exceeds the ask's.
pub fn is_tradable(b: &Order, a: &Order) -> bool {
    b.price >= a.price
}

/// Price-time priority on bids: a higher limit wins, an earlier
/// timestamp breaks price ties. Non-strict, so every order is at least
/// as competitive as itself.
pub fn bid_more_competitive(b1: &Order, b2: &Order) -> bool {
    b1.price > b2.price || (b1.price == b2.price && b1.timestamp <= b2.timestamp)
}

/// Price-time priority on asks: a lower limit wins, an earlier
/// timestamp breaks price ties.
pub fn ask_more_competitive(a1: &Order, a2: &Order) -> bool {
    a1.price < a2.price || (a1.price == a2.price && a1.timestamp <= a2.timestamp)
}

/// Same price and same timestamp: the reflexive part of the
/// competitiveness relations.
pub fn eq_competitive(x: &Order, y: &Order) -> bool {
    x.price == y.price && x.timestamp == y.timestamp
}

/// Total quantity across a sequence of orders.
pub fn vol_orders(orders: &[Order]) -> u128 {
    orders.iter().map(|o| o.quantity as u128).sum()
}

/// Total bid quantity with limit price at least `p`. The probe price is
/// widened so that one past the maximum limit is always representable.
pub fn demand(bids: &[Order], p: u128) -> u128 {
    bids.iter()
        .filter(|b| b.price as u128 >= p)
        .map(|b| b.quantity as u128)
        .sum()
}

/// Total ask quantity with limit price at most `p`.
pub fn supply(asks: &[Order], p: u128) -> u128 {
    asks.iter()
        .filter(|a| a.price as u128 <= p)
        .map(|a| a.quantity as u128)
        .sum()
}

/// The pair of books a matching is computed over. Construction does not
/// validate anything; run [`OrderDomain::check_admissible`] first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrderDomain {
    pub bids: Vec<Order>,
    pub asks: Vec<Order>,
}

impl OrderDomain {
    pub fn new(bids: Vec<Order>, asks: Vec<Order>) -> Self {
        OrderDomain { bids, asks }
    }

    /// Looks up a bid by id.
    pub fn bid(&self, id: u64) -> Option<&Order> {
        self.bids.iter().find(|o| o.id == id)
    }

    /// Looks up an ask by id.
    pub fn ask(&self, id: u64) -> Option<&Order> {
        self.asks.iter().find(|o| o.id == id)
    }

    /// Reports every duplicated id and duplicated timestamp, per side.
    /// An empty report means the domain is admissible.
    pub fn check_admissible(&self) -> AdmissibilityReport {
        let mut issues = Vec::new();
        issues.extend(side_issues(&self.bids, Side::Bid));
        issues.extend(side_issues(&self.asks, Side::Ask));
        AdmissibilityReport { issues }
    }

    pub fn is_admissible(&self) -> bool {
        self.check_admissible().is_admissible()
    }
}

/// Admissibility defects of a single book side.
pub(crate) fn side_issues(orders: &[Order], side: Side) -> Vec<AdmissibilityIssue> {
    let mut issues = Vec::new();
    for id in duplicated_values(orders.iter().map(|o| o.id).collect()) {
        issues.push(AdmissibilityIssue::DuplicateId { side, id });
    }
    for timestamp in duplicated_values(orders.iter().map(|o| o.timestamp).collect()) {
        issues.push(AdmissibilityIssue::DuplicateTimestamp { side, timestamp });
    }
    issues
}

/// Values occurring more than once, each reported a single time.
fn duplicated_values(mut values: Vec<u64>) -> Vec<u64> {
    values.sort_unstable();
    let mut dups = Vec::new();
    for i in 1..values.len() {
        if values[i] == values[i - 1] && dups.last() != Some(&values[i]) {
            dups.push(values[i]);
        }
    }
    dups
}

/// Admissibility findings for an order-domain; empty means admissible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub issues: Vec<AdmissibilityIssue>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "admissible");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// One duplicated key inside a side of the book.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibilityIssue {
    DuplicateId { side: Side, id: u64 },
    DuplicateTimestamp { side: Side, timestamp: u64 },
}

impl fmt::Display for AdmissibilityIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdmissibilityIssue::DuplicateId { side, id } => {
                write!(f, "duplicate {side} id {id}")
            }
            AdmissibilityIssue::DuplicateTimestamp { side, timestamp } => {
                write!(f, "duplicate {side} timestamp {timestamp}")
            }
        }
    }
}

/// An ordered sequence of transactions, as produced by a matching
/// algorithm or read from an exchange's trade book.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Matching {
    transactions: Vec<Transaction>,
}

impl Matching {
    pub fn new(transactions: Vec<Transaction>) -> Self {
        Matching { transactions }
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn into_transactions(self) -> Vec<Transaction> {
        self.transactions
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Total traded volume.
    pub fn vol(&self) -> u128 {
        self.transactions.iter().map(|t| t.quantity as u128).sum()
    }

    /// Total quantity traded by the bid with this id.
    pub fn qty_bid(&self, id: u64) -> u128 {
        self.transactions
            .iter()
            .filter(|t| t.bid_id == id)
            .map(|t| t.quantity as u128)
            .sum()
    }

    /// Total quantity traded by the ask with this id.
    pub fn qty_ask(&self, id: u64) -> u128 {
        self.transactions
            .iter()
            .filter(|t| t.ask_id == id)
            .map(|t| t.quantity as u128)
            .sum()
    }

    /// Total quantity traded between one bid-ask pair.
    pub fn qty_pair(&self, bid_id: u64, ask_id: u64) -> u128 {
        self.transactions
            .iter()
            .filter(|t| t.bid_id == bid_id && t.ask_id == ask_id)
            .map(|t| t.quantity as u128)
            .sum()
    }

    /// Traded totals for every bid id occurring in the matching.
    pub fn bid_quantities(&self) -> BTreeMap<u64, u128> {
        let mut totals = BTreeMap::new();
        for t in &self.transactions {
            *totals.entry(t.bid_id).or_insert(0u128) += t.quantity as u128;
        }
        totals
    }

    /// Traded totals for every ask id occurring in the matching.
    pub fn ask_quantities(&self) -> BTreeMap<u64, u128> {
        let mut totals = BTreeMap::new();
        for t in &self.transactions {
            *totals.entry(t.ask_id).or_insert(0u128) += t.quantity as u128;
        }
        totals
    }
}

impl From<Vec<Transaction>> for Matching {
    fn from(transactions: Vec<Transaction>) -> Self {
        Matching::new(transactions)
    }
}
