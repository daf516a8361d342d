#![allow(dead_code)]

use deconv_ldp::{AdjustedKernel, Dataset, Kernel, LabeledDataset};

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let step = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * step);
    }
    acc * step / 3.0
}

/// Nadaraya-Watson by a plain double loop over the adjusted kernel.
pub fn brute_nw(data: &LabeledDataset, kernel: &Kernel, h: f64, scales: &[f64], x: &[f64], skip: Option<usize>) -> (f64, f64) {
    let ak = AdjustedKernel::for_bandwidth(*kernel, scales, h).unwrap();
    let (mut den, mut num) = (0.0, 0.0);
    let mut u = vec![0.0; x.len()];
    for (i, z) in data.inputs().rows().enumerate() {
        if Some(i) == skip {
            continue;
        }
        for j in 0..x.len() {
            u[j] = (x[j] - z[j]) / h;
        }
        let w = ak.value(&u);
        den += w;
        num += w * data.responses()[i];
    }
    (den, num)
}

pub fn brute_density(data: &Dataset, kernel: &Kernel, h: f64, scales: &[f64], x: f64) -> f64 {
    let ak = AdjustedKernel::for_bandwidth(*kernel, scales, h).unwrap();
    data.records().iter().map(|z| ak.value(&[(x - z) / h])).sum::<f64>() / (data.n() as f64 * h)
}

pub fn uniform_points(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    // splitmix64
    let mut state = seed;
    (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            lo + (hi - lo) * ((z >> 11) as f64 / (1u64 << 53) as f64)
        })
        .collect()
}

pub fn cli() -> std::process::Command {
    std::process::Command::new(env!("CARGO_BIN_EXE_deconv-ldp"))
}

/// Runs `args` (with `--out dir`) and returns the exit code and stderr.
pub fn run_cli(dir: &std::path::Path, args: &[&str]) -> (i32, String) {
    let out = cli().args(args).arg("--out").arg(dir).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

/// A pipeline touching every subcommand; returns each written file with its bytes.
pub fn cli_pipeline(dir: &std::path::Path, seed: u64, threads: usize) -> Vec<(String, Vec<u8>)> {
    let seed = seed.to_string();
    let threads = threads.to_string();
    let common = ["--seed", seed.as_str(), "--threads", threads.as_str()];
    let data = dir.join("synth.csv");
    let data = data.to_str().unwrap();
    let steps: Vec<Vec<&str>> = vec![
        vec!["synth", "--curve", "g2", "--n", "400"],
        vec!["privatize", "--input", data, "--columns", "x", "--epsilon", "5", "--support=-3:3"],
        vec!["kde", "--input", data, "--bandwidth", "0.4", "--points", "64"],
        vec!["naive-kde", "--input", data, "--privatize", "--epsilon", "5", "--support=-3:3", "--bandwidth", "0.4", "--points", "64"],
        vec!["deconv-kde", "--input", data, "--privatize", "--epsilon", "5", "--support=-3:3", "--bandwidth", "cv", "--grid", "0.3:2:6", "--points", "64"],
        vec!["regress", "--input", data, "--privatize", "--epsilon", "5", "--support=-3:3", "--bandwidth", "cv", "--points", "50"],
        vec!["regress", "--input", data, "--privatize", "--epsilon", "5", "--support=-3:3", "--model", "linear"],
        vec!["cv", "--input", data, "--privatize", "--epsilon", "5", "--support=-3:3"],
        vec!["sweep", "--n", "300", "--epsilons", "2,8", "--seeds", "2", "--models", "kernel,linear", "--gnuplot"],
    ];
    let mut files = Vec::new();
    for step in steps {
        let mut args = step.clone();
        args.extend(common);
        let (code, err) = run_cli(dir, &args);
        assert_eq!(code, 0, "{args:?} failed: {err}");
        let mut names: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        for p in names {
            let name = format!("{}:{}", step[0], p.file_name().unwrap().to_string_lossy());
            files.push((name, std::fs::read(&p).unwrap()));
        }
    }
    files
}
