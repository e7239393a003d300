#![no_main]

use libfuzzer_sys::fuzz_target;

// One target covers the bundle and the three standalone config parsers;
// they share the input shape.
fuzz_target!(|data: &[u8]| {
    let _ = thermofal::format::parse_generator_config(data);
    let _ = thermofal::format::parse_ga_config(data);
    let _ = thermofal::format::parse_sim_config(data);
    if let Ok(bundle) = thermofal::format::parse_config_bundle(data) {
        let json = thermofal::format::config_bundle_to_json(&bundle);
        let reparsed = thermofal::format::parse_config_bundle(json.as_bytes())
            .expect("canonical form parses");
        assert_eq!(reparsed, bundle);
    }
});
