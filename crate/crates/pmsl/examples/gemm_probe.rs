//! Measures f64 matrix-product throughput at the shapes the LSTM trains at.
//! Run with `cargo run -p pmsl --release --example gemm_probe`.

use ndarray::Array2;
use std::time::Instant;

fn main() {
    for (m, k, n) in [(128, 64, 256), (128, 256, 64), (64, 128, 256), (128, 15, 256)] {
        let a = Array2::<f64>::from_elem((m, k), 0.5);
        let b = Array2::<f64>::from_elem((k, n), 0.25);
        let mut acc = 0.0;
        for _ in 0..50 {
            acc += a.dot(&b)[(0, 0)];
        }
        let reps = 2000;
        let t = Instant::now();
        for _ in 0..reps {
            acc += a.dot(&b)[(0, 0)];
        }
        let elapsed = t.elapsed().as_secs_f64();
        let flops = 2.0 * (m * k * n * reps) as f64;
        println!(
            "{m}x{k} * {k}x{n}: {:7.3} ms/op  {:5.2} GFLOP/s  (checksum {acc:.1})",
            elapsed / reps as f64 * 1e3,
            flops / elapsed / 1e9
        );
    }
}
