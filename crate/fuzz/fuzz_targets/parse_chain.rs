#![no_main]

use libfuzzer_sys::fuzz_target;
use toric_deform::{hj_expand, hj_value, Chain};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(chain) = Chain::parse(text) else { return };
    assert_eq!(Chain::parse(&chain.to_string()).unwrap(), chain);
    if let Ok((n, q)) = hj_value(&chain) {
        if n > 1 {
            assert_eq!(hj_expand(n, q).unwrap(), chain);
        }
    }
});
