// Spectrum-access decisions from sensed carrier occupancy and a policy table.

use airan::sas::{decide_spectrum, PolicyTable, SignalClass};

const POLICY: &str = r#"
[[carrier]]
carrier_index = 0
center_hz = 3.55e9
bandwidth_hz = 20e6
incumbent_protected = true
max_power_dbm = 30.0

[[carrier]]
carrier_index = 1
center_hz = 3.57e9
bandwidth_hz = 20e6
incumbent_protected = false
max_power_dbm = 27.0

[[carrier]]
carrier_index = 2
center_hz = 3.59e9
bandwidth_hz = 20e6
incumbent_protected = false
max_power_dbm = 24.0

[[mcs]]
mcs_index = 0
min_snr_db = -5.0

[[mcs]]
mcs_index = 4
min_snr_db = 10.0

[[mcs]]
mcs_index = 9
min_snr_db = 25.0
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    use SignalClass::*;
    let policy = PolicyTable::from_toml(POLICY)?;
    let cases = [
        (vec![Noise, Noise, Noise], 30.0),
        (vec![Noise, Wifi, Noise], 12.0),
        (vec![Noise, Lte, Both], 12.0),
        (vec![Wifi, Noise, Noise], -8.0),
    ];
    for (occ, snr) in cases {
        let d = decide_spectrum(&occ, &policy, snr)?;
        let sensed: Vec<String> = occ.iter().map(|c| c.to_string()).collect();
        println!("[{}] link {snr} dB -> {}", sensed.join(", "), d.record());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
