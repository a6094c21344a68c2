//! Feeds arbitrary bytes to the event-feed reader, replays whatever
//! parses, and checks that the reference matching audits as compliant
//! against itself.

#![no_main]

use double_auction::{check_tradebook, preprocess, read_events_csv, um, Mode, Verdict};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(events) = read_events_csv(data) else { return };
    let out = preprocess(&events);
    if !out.admissibility.is_admissible() {
        return;
    }
    let d = out.domain;
    if d.bids.len() + d.asks.len() > 128 {
        return;
    }
    let reference = um(&d).unwrap();
    let report = check_tradebook(&d, &reference, Mode::Uniform).unwrap();
    assert_eq!(report.verdict, Verdict::Compliant);
});
