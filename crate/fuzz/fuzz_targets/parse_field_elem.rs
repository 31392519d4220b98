#![no_main]

use libfuzzer_sys::fuzz_target;
use toric_deform::{Field, FieldSpec};

fuzz_target!(|data: &[u8]| {
    let Some((&kind, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let spec = match kind % 4 {
        0 => FieldSpec::Rationals,
        1 => FieldSpec::prime(7),
        2 => FieldSpec::Finite { p: 5, m: 2 },
        _ => FieldSpec::Finite { p: 2, m: 3 },
    };
    let field = Field::new(spec).unwrap();
    if let Ok(x) = field.parse_elem(text) {
        assert_eq!(field.parse_elem(&field.encode(&x)).unwrap(), x);
    }
});
