mod common;

use common::*;

#[test]
fn conv3d_gradients() {
    for (cin, cout, n, seed) in [(1, 1, 4, 1), (2, 3, 4, 2), (3, 2, 5, 3)] {
        let e = conv3d_gradient_error(cin, cout, n, seed);
        assert!(e < 1e-6, "{cin}->{cout} n={n}: {e:e}");
    }
}

#[test]
fn softsign_gradient() {
    assert!(softsign_gradient_error(4) < 1e-8);
}

#[test]
fn pool_and_upsample_gradients() {
    for n in [4, 8] {
        assert!(pool_gradient_error(n, 5) < 1e-6);
        assert!(upsample_gradient_error(n / 2, 6) < 1e-6);
    }
}

#[test]
fn loss_gradient() {
    let e = loss_gradient_error(8, 7);
    assert!(e < 1e-6, "{e:e}");
}

#[test]
fn whole_network_gradient() {
    for seed in [8, 9] {
        let e = network_gradient_error(seed);
        assert!(e < 1e-5, "seed {seed}: {e:e}");
    }
}
