//! Feeds arbitrary bytes to the trade-book reader and audits whatever
//! parses against a fixed small book in both modes. The checker must
//! reach a verdict on any parsed book, never fault.

#![no_main]

use double_auction::{check_tradebook, read_trades_csv, Mode, Order, OrderDomain};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(book) = read_trades_csv(data) else { return };
    if book.len() > 256 {
        return;
    }
    let d = OrderDomain::new(
        vec![Order::new(1, 1, 5, 40).unwrap(), Order::new(2, 2, 3, 35).unwrap()],
        vec![Order::new(1, 3, 4, 30).unwrap(), Order::new(2, 4, 6, 38).unwrap()],
    );
    let uniform = check_tradebook(&d, &book, Mode::Uniform).unwrap();
    let maximum = check_tradebook(&d, &book, Mode::Maximum).unwrap();
    let _ = (uniform.verdict, maximum.verdict);
});
