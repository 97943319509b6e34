// Write synthetic captures as sample-buffer files (with their sample-rate
// sidecars) for `airan sas-decide`, then read one back.
//
//     cargo run --example capture_files -- out/captures NOISE WIFI NOISE

use std::path::{Path, PathBuf};

use airan::rng::RngStream;
use airan::sas::{synth_capture, SignalClass};
use airan::waveform::{sidecar_path, SampleBuffer};

pub fn write_captures(dir: &Path, classes: &[SignalClass], snr_db: f64) -> airan::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    classes
        .iter()
        .enumerate()
        .map(|(i, &class)| {
            let path = dir.join(format!("carrier{i}.airn"));
            synth_capture(class, snr_db, 5120, RngStream::new(2024, i as u64))?.save(&path)?;
            Ok(path)
        })
        .collect()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile_dir()?;
    let paths = write_captures(&dir, &[SignalClass::Noise, SignalClass::Wifi, SignalClass::Both], 15.0)?;
    let back = SampleBuffer::load(&paths[1])?;
    println!("{}: {} samples at {} Hz", paths[1].display(), back.len(), back.sample_rate_hz());
    println!("sidecar: {}", std::fs::read_to_string(sidecar_path(&paths[1]))?.trim());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn tempfile_dir() -> std::io::Result<PathBuf> {
    let dir = std::env::temp_dir().join(format!("airan-captures-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 2 {
        return run_example();
    }
    let classes = args[1..]
        .iter()
        .map(|a| {
            SignalClass::ALL
                .into_iter()
                .find(|c| c.name().eq_ignore_ascii_case(a))
                .ok_or_else(|| format!("unknown class {a}; use NOISE, WIFI, LTE or BOTH"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for p in write_captures(Path::new(&args[0]), &classes, 15.0)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
