#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(choice) = tloss_cli::spec::parse_metric_spec(text) {
        let label = choice.label();
        assert!(!label.is_empty());
        assert_eq!(tloss_cli::spec::parse_metric_spec(&label), Ok(choice));
    }
    let _ = tloss_cli::spec::parse_agg(text);
    let _ = tloss_cli::spec::parse_transform(text);
});
