mod qpsk_ofdm {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/qpsk_ofdm.rs"));
}

mod pa_distortion {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pa_distortion.rs"));
}

mod zf_vs_rnn {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/zf_vs_rnn.rs"));
}

mod ee_sweep {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ee_sweep.rs"));
}

mod dbn_toy {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/dbn_toy.rs"));
}

mod spectrum_detection {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/spectrum_detection.rs"));
}

mod capture_files {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/capture_files.rs"));
}

mod spectrum_decision {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/spectrum_decision.rs"));
}

#[test]
fn qpsk_ofdm_example_runs() {
    qpsk_ofdm::run_example().expect("qpsk_ofdm example should run");
}

#[test]
fn pa_distortion_example_runs() {
    pa_distortion::run_example().expect("pa_distortion example should run");
}

#[test]
fn zf_vs_rnn_example_runs() {
    zf_vs_rnn::run_example().expect("zf_vs_rnn example should run");
}

#[test]
fn ee_sweep_example_runs() {
    ee_sweep::run_example().expect("ee_sweep example should run");
}

#[test]
fn dbn_toy_example_runs() {
    dbn_toy::run_example().expect("dbn_toy example should run");
}

#[test]
fn spectrum_detection_example_runs() {
    spectrum_detection::run_example().expect("spectrum_detection example should run");
}

#[test]
fn spectrum_decision_example_runs() {
    spectrum_decision::run_example().expect("spectrum_decision example should run");
}

#[test]
fn capture_files_example_runs() {
    capture_files::run_example().expect("capture_files example should run");
}
