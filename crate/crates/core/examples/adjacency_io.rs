//! Generate an adjacency matrix, write it as CSV, read it back and inspect
//! its Laplacian spectrum.
//!
//! `cargo run --example adjacency_io -- 6 0.5`

use pinning::network::{generate_adjacency, laplacian, laplacian_spectrum, read_adjacency_csv, write_adjacency_csv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(6);
    let threshold: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.5);

    let g = generate_adjacency(n, threshold, 3)?;
    let mut csv = Vec::new();
    write_adjacency_csv(&g, &mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    assert_eq!(read_adjacency_csv(csv.as_slice())?, g);

    let l = laplacian(&g)?.laplacian;
    for z in laplacian_spectrum(&l) {
        println!("{:.4} {:+.4}i", z.re, z.im);
    }
    Ok(())
}
