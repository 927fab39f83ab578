use std::ffi::CString;
use std::ptr;

use lobspatial::data::{synth_generate, SyntheticGenConfig};
use lobspatial::models::{save_model, train_model, Family, ModelConfig};
use lobspatial_ffi::*;

fn bundle(dir: &std::path::Path, family: Family) -> (CString, lobspatial::data::LabeledSample) {
    let cfg = SyntheticGenConfig {
        n_samples: 400,
        ..SyntheticGenConfig::default()
    };
    let (samples, law) = synth_generate(&cfg).unwrap();
    let mut mc = ModelConfig::default();
    mc.train.epochs = 1;
    mc.train.neurons_per_hidden_layer = 8;
    mc.spatial_neurons = 8;
    let m = train_model(family, &samples[..300], &samples[300..350], law.case, &mc).unwrap();
    let path = dir.join(format!("{family}.model.json"));
    save_model(&m.model, &path).unwrap();
    (CString::new(path.to_str().unwrap()).unwrap(), samples[399].clone())
}

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { lobs_last_error(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n.min(255));
    String::from_utf8(buf).unwrap()
}

#[test]
fn load_query_and_free() {
    let dir = tempfile::tempdir().unwrap();
    for family in [Family::Naive, Family::Spatial] {
        let (path, sample) = bundle(dir.path(), family);
        unsafe {
            let mut model = ptr::null_mut();
            assert_eq!(lobs_model_load(path.as_ptr(), &mut model), LobsStatus::Ok);
            let mut fam = LobsFamily::Naive;
            assert_eq!(lobs_model_family(model, &mut fam), LobsStatus::Ok);
            assert_eq!(fam as i32, family as i32);

            let st = &sample.state;
            let mut state = ptr::null_mut();
            let code = lobs_state_new(
                st.timestamp,
                st.best_ask_price,
                st.best_bid_price,
                st.ask_sizes.as_ptr(),
                st.bid_sizes.as_ptr(),
                lobs_levels(),
                &mut state,
            );
            assert_eq!(code, LobsStatus::Ok);

            let mut size = 0;
            assert_eq!(lobs_model_grid_size(model, &mut size), LobsStatus::Ok);
            let mut probs = vec![0.0; size * size];
            let mut residual = 0.0;
            assert_eq!(
                lobs_joint_pmf(model, state, probs.as_mut_ptr(), probs.len(), &mut residual),
                LobsStatus::Ok
            );
            let total: f64 = probs.iter().sum::<f64>() + residual;
            assert!((total - 1.0).abs() < 1e-9, "{total}");

            let (mut y1, mut y2, mut p) = ([0i64; 3], [0i64; 3], [0.0; 3]);
            assert_eq!(lobs_topk(model, state, 3, y1.as_mut_ptr(), y2.as_mut_ptr(), p.as_mut_ptr()), LobsStatus::Ok);
            assert!(p[0] >= p[1] && p[1] >= p[2]);

            let mut lp = 0.0;
            assert_eq!(lobs_log_prob(model, state, y1[0], y2[0], &mut lp), LobsStatus::Ok);
            assert!((lp.exp() - p[0]).abs() < 1e-12);
            let half = (size / 2) as i64;
            let idx = ((y1[0] + half) as usize) * size + (y2[0] + half) as usize;
            assert!((probs[idx] - p[0]).abs() < 1e-12);

            let mut small = [0.0; 4];
            assert_eq!(
                lobs_joint_pmf(model, state, small.as_mut_ptr(), small.len(), &mut residual),
                LobsStatus::BufferTooSmall
            );
            assert!(last_error().contains("probs needs"));

            lobs_state_free(state);
            lobs_model_free(model);
        }
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut model = ptr::null_mut();
        let missing = CString::new("/nonexistent/x.model.json").unwrap();
        assert_eq!(lobs_model_load(missing.as_ptr(), &mut model), LobsStatus::Io);
        assert!(model.is_null());
        assert!(last_error().contains("nonexistent"));
        assert_eq!(lobs_model_load(ptr::null(), &mut model), LobsStatus::NullPointer);

        let sizes = vec![1u64; lobs_levels()];
        let mut state = ptr::null_mut();
        let code = lobs_state_new(0, 100, 100, sizes.as_ptr(), sizes.as_ptr(), sizes.len(), &mut state);
        assert_eq!(code, LobsStatus::InvalidArgument);
        let code = lobs_state_new(0, 101, 100, sizes.as_ptr(), sizes.as_ptr(), 3, &mut state);
        assert_eq!(code, LobsStatus::InvalidArgument);
        assert!(last_error().contains("levels"));

        lobs_model_free(ptr::null_mut());
        lobs_state_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/lobspatial.h")).unwrap();
    for name in ["lobs_model_load", "lobs_joint_pmf", "lobs_topk", "LOBS_STATUS_BUFFER_TOO_SMALL", "typedef struct LobsModel"] {
        assert!(h.contains(name), "{name}");
    }
}
