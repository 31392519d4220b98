#![no_main]

use libfuzzer_sys::fuzz_target;
use toric_deform::{DvrSpec, Scalar};

fuzz_target!(|data: &[u8]| {
    let Some((&kind, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let spec = match kind % 3 {
        0 => DvrSpec::equal_char_zero(3),
        1 => DvrSpec::equal_char_p(5, 3),
        _ => DvrSpec::mixed_char(5, 3),
    }
    .unwrap();
    if let Ok(s) = Scalar::parse(spec, text) {
        // printing must parse back to the same element
        assert_eq!(Scalar::parse(spec, &s.to_string()).unwrap(), s);
    }
});
