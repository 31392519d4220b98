#![no_main]

use libfuzzer_sys::fuzz_target;
use toric_deform::{DvrSpec, SeriesRing};

fuzz_target!(|data: &[u8]| {
    let Some((&kind, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let spec = match kind % 3 {
        0 => DvrSpec::equal_char_zero(2),
        1 => DvrSpec::equal_char_p(3, 2),
        _ => DvrSpec::mixed_char(3, 2),
    }
    .unwrap();
    let ring = SeriesRing::new(4, spec, 16);
    if let Ok(s) = ring.parse(text) {
        assert_eq!(ring.parse(&s.to_string()).unwrap(), s);
    }
});
