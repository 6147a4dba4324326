#![no_main]

use bo_scatter::potentials::parse_potential_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((x, u)) = parse_potential_csv(text) {
        assert_eq!(x.len(), u.len());
        assert!(x.windows(2).all(|w| w[0] < w[1]));
        assert!(u.iter().all(|v| v.is_finite()));
    }
});
