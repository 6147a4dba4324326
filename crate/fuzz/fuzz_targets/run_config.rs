#![no_main]

use bo_scatter_cli::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = parse_config(text) {
        let _ = config.validate();
        let echoed = serde_json::to_string(&config).expect("configs serialize");
        let again = parse_config(&echoed).expect("echoed configs parse");
        assert_eq!(serde_json::to_string(&again).unwrap(), echoed);
    }
});
