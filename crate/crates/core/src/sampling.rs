//! Random test data: polynomial Hamiltonians, superpaths, endpoint data
//! and vierbein blocks. Everything is drawn from a caller-supplied RNG so
//! runs are reproducible from a seed.

use std::sync::Arc;

use rand::Rng;

use crate::grassmann::{GrassmannAlgebra, Supernumber};
use crate::phase_flow::Observable;
use crate::poly::Poly;
use crate::ring::{qi, Qi, Ring};
use crate::superfield::EndpointData;
use crate::vierbein::{Block, EvenEntry, OddEntry};

/// Small nonzero rational `k/d` with `|k| ≤ 5`, `1 ≤ d ≤ 4`.
pub fn small_rational<G: Rng>(rng: &mut G) -> Qi {
    loop {
        let k = rng.gen_range(-5..=5);
        if k != 0 {
            return qi(k, rng.gen_range(1..=4));
        }
    }
}

/// Exponent vector of total degree at most `max_degree` over `vars` variables.
fn random_monomial<G: Rng>(vars: usize, max_degree: u32, rng: &mut G) -> Vec<u32> {
    let total = rng.gen_range(0..=max_degree);
    let mut e = vec![0u32; vars];
    for _ in 0..total {
        e[rng.gen_range(0..vars)] += 1;
    }
    e
}

/// Polynomial in `vars` variables with up to `max_terms` random terms.
pub fn random_poly<G: Rng>(vars: usize, max_degree: u32, max_terms: usize, rng: &mut G) -> Poly<Qi> {
    let count = rng.gen_range(1..=max_terms);
    Poly::from_terms((0..count).map(|_| (random_monomial(vars, max_degree, rng), small_rational(rng))))
}

/// Random Hamiltonian on `2n` phase-space variables; guaranteed nonconstant.
pub fn random_hamiltonian<G: Rng>(n: usize, max_degree: u32, rng: &mut G) -> Observable {
    loop {
        let p = random_poly(2 * n, max_degree, 5, rng);
        if (0..2 * n).any(|a| !p.derivative(a).is_zero()) {
            return Observable::new(n, p).expect("matching variable count");
        }
    }
}

/// Random potential `V(q)` of degree at most `max_degree`.
pub fn random_potential<G: Rng>(max_degree: u32, rng: &mut G) -> Poly<Qi> {
    random_poly(1, max_degree, 3, rng)
}

/// Endpoint data at both ends, each ghost an odd combination of all
/// generators of `alg`.
pub fn random_endpoints<G: Rng>(
    n: usize,
    alg: &Arc<GrassmannAlgebra>,
    rng: &mut G,
) -> (EndpointData<Qi>, EndpointData<Qi>) {
    let odd = |rng: &mut G| {
        let mut x = Supernumber::zero(alg);
        for g in 0..alg.len() {
            if rng.gen_bool(0.7) {
                x = &x + &Supernumber::generator(alg, g).unwrap().scale(&small_rational(rng));
            }
        }
        x
    };
    let side = |rng: &mut G| EndpointData {
        p: (0..n).map(|_| small_rational(rng)).collect(),
        lambda_p: (0..n).map(|_| small_rational(rng)).collect(),
        c_p: (0..n).map(|_| odd(rng)).collect(),
        cbar_p: (0..n).map(|_| odd(rng)).collect(),
    };
    let end = side(rng);
    let start = side(rng);
    (end, start)
}

/// Ghost algebra for `n` endpoint pairs: `c_k, cb_k, c0_k, cb0_k`.
pub fn endpoint_algebra(n: usize) -> Arc<GrassmannAlgebra> {
    let labels = (0..n).flat_map(|k| {
        [
            format!("c_{k}"),
            format!("cb_{k}"),
            format!("c0_{k}"),
            format!("cb0_{k}"),
        ]
    });
    GrassmannAlgebra::new(labels).expect("distinct labels")
}

pub fn random_even_entry<G: Rng>(rng: &mut G, with_soul: bool) -> EvenEntry {
    let soul = if with_soul { small_rational(rng) } else { <Qi as Ring>::zero() };
    EvenEntry::new(small_rational(rng), soul)
}

pub fn random_odd_entry<G: Rng>(rng: &mut G) -> OddEntry {
    OddEntry::new(small_rational(rng), small_rational(rng))
}

/// Block data for either solution branch; the entry being solved for is
/// left at zero. Branch two (`e_B = 0`) is drawn a third of the time.
pub fn random_block<G: Rng>(rng: &mut G, with_souls: bool) -> Block {
    let mut e = random_even_entry(rng, with_souls);
    let mut b = EvenEntry::zero();
    let mut c = random_even_entry(rng, with_souls);
    if rng.gen_range(0..3) == 0 {
        e.body = <Qi as Ring>::zero();
        b = random_even_entry(rng, with_souls);
        c = EvenEntry::zero();
    }
    Block {
        b,
        c,
        d: random_even_entry(rng, with_souls),
        e,
    }
}
