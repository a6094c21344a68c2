//! Double-auction matching: fair division of a crossed order book.
//!
//! The crate models one instrument's call auction. A book of bids and
//! asks (an [`OrderDomain`]) is matched into a set of transactions (a
//! [`Matching`]) by one of two reference algorithms:
//!
//! * [`um`] clears everything at a single uniform price and trades the
//!   optimal volume attainable at one price,
//! * [`mm`] trades the maximum volume attainable at any mix of prices.
//!
//! Both outcomes are fair: no order is skipped while a less competitive
//! order on its own side trades. Equal-volume fair matchings assign
//! every order the same traded total, so the [`checker`] audits an
//! exchange's trade book by comparing per-order quantities against the
//! reference outcome instead of chasing individual pairings.
//!
//! ```
//! use double_auction::{um, Order, OrderDomain};
//!
//! let domain = OrderDomain::new(
//!     vec![
//!         Order::new(1, 1, 1, 100).unwrap(),
//!         Order::new(2, 2, 1, 85).unwrap(),
//!     ],
//!     vec![
//!         Order::new(1, 3, 1, 70).unwrap(),
//!         Order::new(2, 4, 1, 90).unwrap(),
//!     ],
//! );
//! let matching = um(&domain).unwrap();
//! assert_eq!(matching.vol(), 1);
//! assert_eq!(matching.transactions()[0].price(), 70);
//! ```

pub mod algorithms;
pub mod checker;
pub mod error;
pub mod io;
pub mod oracle;
pub mod order;
pub mod properties;

pub use algorithms::{
    assign_price, fair, fob, foa, foa_with_observer, match_subroutine, mm, um, SortKind,
    SortedBook,
};
pub use checker::{
    check_tradebook, preprocess, Action, CheckReport, Discrepancy, EventPrice, Mode,
    PreprocessIssue, PreprocessOutcome, RawOrderEvent, Verdict,
};
pub use error::Error;
pub use io::{
    read_events_csv, read_orders_csv, read_trades_csv, write_orders_csv, write_report,
    write_trades_csv, IoError,
};
pub use oracle::{
    enumerate_fair_witnesses, max_matching_volume, optimal_uniform_volume, ENUM_MAX_PAIRS,
    ENUM_MAX_VOLUME,
};
pub use order::{
    ask_more_competitive, bid_more_competitive, demand, eq_competitive, is_tradable, supply,
    vol_orders, AdmissibilityIssue, AdmissibilityReport, Matching, Order, OrderDomain, Side,
    Transaction,
};
pub use properties::{
    bound_violations, candidate_prices, demand_supply_bound_holds, is_fair, is_fair_asks,
    is_fair_bids, is_uniform, is_valid_matching, uniformity_violation, validate_fair,
    validate_fair_asks, validate_fair_bids, validate_matching, ViolationDetail,
};
