#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(dataset) = tloss_core::dataset::parse_dataset_str(text) {
        let n = dataset.n_units();
        assert!(n > 0);
        assert_eq!(dataset.unit_ids().len(), n);
        assert_eq!(dataset.actuals().len(), n);
        assert!(!dataset.column_names().is_empty());
        for name in dataset.column_names() {
            assert_eq!(dataset.predictions(name).unwrap().len(), n);
        }
        assert_eq!(dataset.to_records().len(), n);
    }
});
