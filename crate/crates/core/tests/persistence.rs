mod common;

use proptest::prelude::*;
use vinecop::io::{load_bytes, load_from_path, save_to_path};
use vinecop::{fig1a, load, save, schedule, VarSet, VineModel};

use common::{mixed_model, random_vine, rng};

fn reference_text() -> String {
    let mut r = rng(5);
    let m = mixed_model(fig1a(), &mut r);
    let order = schedule(m.structure(), VarSet::EMPTY, false).unwrap();
    save(&m.with_default_order(Some(order.order().to_vec())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn save_load_is_identity(seed in any::<u64>(), d in 2usize..12) {
        let mut r = rng(seed);
        let m = mixed_model(random_vine(d, &mut r), &mut r);
        let text = save(&m);
        let back: VineModel<f64> = load(&text).unwrap();
        prop_assert_eq!(save(&back), text);
        for ((e1, c1), (e2, c2)) in m.pairs().zip(back.pairs()) {
            prop_assert_eq!(e1, e2);
            prop_assert_eq!(c1, c2);
        }
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let _ = load_bytes::<f64>(&bytes);
    }

    #[test]
    fn mutated_documents_never_panic(pos in any::<prop::sample::Index>(), byte in any::<u8>(), cut in any::<prop::sample::Index>()) {
        let text = reference_text().into_bytes();
        let mut edited = text.clone();
        let i = pos.index(edited.len());
        edited[i] = byte;
        let _ = load_bytes::<f64>(&edited);
        let _ = load_bytes::<f64>(&text[..cut.index(text.len())]);
        let _ = load_bytes::<f32>(&edited);
    }

    #[test]
    fn bad_parameters_never_panic(value in prop_oneof![Just("1e400"), Just("-7"), Just("\"x\""), Just("null"), Just("2.5")]) {
        let text = reference_text();
        let key = "\"theta\": ";
        let at = text.find(key).unwrap() + key.len();
        let end = at + text[at..].find([',', '\n']).unwrap();
        let edited = format!("{}{}{}", &text[..at], value, &text[end..]);
        let loaded = load::<f64>(&edited);
        if matches!(value, "1e400" | "\"x\"" | "null") {
            prop_assert!(loaded.is_err());
        }
    }
}

#[test]
fn file_round_trip_keeps_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let m = mixed_model(fig1a(), &mut rng(9))
        .with_default_order(Some(vec![0, 1, 3, 2, 4]))
        .with_provenance(Some("unit".into()));
    save_to_path(&m, &path).unwrap();
    let back: VineModel<f64> = load_from_path(&path).unwrap();
    assert_eq!(back.default_order(), Some(&[0, 1, 3, 2, 4][..]));
    assert_eq!(back.provenance(), Some("unit"));
    assert_eq!(save(&back), save(&m));
}

#[test]
fn single_precision_reads_double_documents() {
    let m = mixed_model(fig1a(), &mut rng(3));
    let narrow: VineModel<f32> = load(&save(&m)).unwrap();
    for ((_, a), (_, b)) in m.pairs().zip(narrow.pairs()) {
        assert_eq!(a.family(), b.family());
        assert!((a.theta() - b.theta() as f64).abs() <= 1e-6 * a.theta().abs().max(1.0));
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let e = load_from_path::<f64>("/nonexistent/model.json").unwrap_err();
    assert!(!e.is_numeric());
}
