use polyqram::circuit::ToffoliDecomp;
use polyqram::qlut::{default_split, qlut_resources, split_address, synth_qlut, QlutConfig};
use polyqram::sim::verify_lookup;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_table(rng: &mut ChaCha8Rng, n: usize, l: usize) -> Vec<u64> {
    (0..1 << n).map(|_| rng.gen_range(0..1u64 << l)).collect()
}

#[test]
fn lookup_is_correct_for_all_splits() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 2..=8 {
        for n1 in 1..n {
            for l in [1, 2, 3] {
                let table = random_table(&mut rng, n, l);
                let q = synth_qlut(&QlutConfig::new(n1, n - n1, l, table.clone())).unwrap();
                let v = verify_lookup(&q.circuit, &table).unwrap();
                assert!(v.pass, "n1={n1} n2={} l={l}: {v:?}", n - n1);
            }
        }
    }
}

#[test]
fn measured_costs_match_closed_form() {
    for n1 in 1..=5 {
        for n2 in 1..=5 {
            for l in [1, 2] {
                let n = n1 + n2;
                let q = synth_qlut(&QlutConfig::new(n1, n2, l, vec![1; 1 << n])).unwrap();
                let r = q.report(&ToffoliDecomp::AND_GADGET).unwrap();
                assert_eq!(
                    r.measured,
                    qlut_resources(n1, n2, l),
                    "n1={n1} n2={n2} l={l}"
                );
            }
        }
    }
}

#[test]
fn all_zero_and_all_one_tables() {
    for (n1, n2) in [(1, 1), (2, 3), (3, 2)] {
        let n = n1 + n2;
        for word in [0u64, 0b11] {
            let table = vec![word; 1 << n];
            let q = synth_qlut(&QlutConfig::new(n1, n2, 2, table.clone())).unwrap();
            assert!(verify_lookup(&q.circuit, &table).unwrap().pass);
        }
    }
}

#[test]
fn wrong_table_is_rejected() {
    let table: Vec<u64> = (0..16).map(|i| (i * 7 % 3 == 0) as u64).collect();
    let q = synth_qlut(&QlutConfig::new(2, 2, 1, table.clone())).unwrap();
    let mut other = table.clone();
    other[9] ^= 1;
    let v = verify_lookup(&q.circuit, &other).unwrap();
    assert!(!v.pass);
    assert_eq!(v.counterexample.unwrap().address, 9);
}

#[test]
fn split_recombines() {
    for n in 2..=10usize {
        let (n1, n2) = default_split(n);
        for a in [0, 1, (1u64 << n) - 1, (1u64 << n) / 3] {
            let (hi, lo) = split_address(a, n1, n2).unwrap();
            assert_eq!(lo + (hi << n2), a);
        }
    }
}
