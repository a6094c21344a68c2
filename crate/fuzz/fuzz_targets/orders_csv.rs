//! Feeds arbitrary bytes to the order-book reader, then cross-checks
//! the two auction algorithms on anything that parses into a small
//! admissible book.

#![no_main]

use double_auction::{mm, read_orders_csv, um, OrderDomain, Side};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let bids = read_orders_csv(data, Side::Bid);
    let asks = read_orders_csv(data, Side::Ask);
    let (Ok(bids), Ok(asks)) = (bids, asks) else { return };
    let d = OrderDomain::new(bids, asks);
    if !d.is_admissible() || d.bids.len() > 64 || d.asks.len() > 64 {
        return;
    }
    let uniform = um(&d).unwrap();
    let maximum = mm(&d).unwrap();
    assert!(uniform.vol() <= maximum.vol());
});
