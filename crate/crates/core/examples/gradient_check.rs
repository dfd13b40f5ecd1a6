//! Compare the analytic backward pass of a small conv + dense network against
//! central finite differences in 64-bit arithmetic.
//!
//! cargo run --release --example gradient_check

use peghole::agents::{Batch, ConvSpec, ImageShape, NetSpec, Network, OutputActivation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = NetSpec {
        image: Some(ImageShape { channels: 2, height: 8, width: 8 }),
        conv: vec![ConvSpec { out_channels: 3, kernel: 3, stride: 2 }],
        vector_dim: 4,
        trunk: vec![16],
        out_dim: 3,
        output: OutputActivation::Tanh,
        init_gain: 1.0,
        output_init: 0.5,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut net: Network<f64> = Network::new(spec, &mut rng)?;
    let n = 4;
    let image: Vec<f64> = (0..n * 128).map(|_| rng.random_range(0.0..1.0)).collect();
    let vector: Vec<f64> = (0..n * 4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let input = Batch { n, image: Some(&image), vector: &vector };

    // Loss = sum of outputs, so the upstream gradient is all ones.
    let cache = net.forward(&input)?;
    let mut grads = vec![0.0; net.param_count()];
    net.backward(&cache, &vec![1.0; n * 3], &mut grads)?;

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in (0..net.param_count()).step_by(7) {
        let orig = net.params[i];
        net.params[i] = orig + h;
        let up: f64 = net.predict(&input)?.iter().sum();
        net.params[i] = orig - h;
        let down: f64 = net.predict(&input)?.iter().sum();
        net.params[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let rel = (numeric - grads[i]).abs() / numeric.abs().max(grads[i].abs()).max(1e-8);
        worst = worst.max(rel);
    }
    println!("{} parameters, worst relative error over every 7th: {worst:.2e}", net.param_count());
    Ok(())
}
