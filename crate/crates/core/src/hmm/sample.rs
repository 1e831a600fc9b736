use rand_distr::{Distribution, Normal};

use crate::hmm::model::{Emission, HmmModel, Observations};
use crate::rng::{categorical, seeded};
use crate::scalar::Real;

/// Ancestral sample of a hidden path and its observations.
pub fn hmm_sample<T: Real>(model: &HmmModel<T>, len: usize, seed: u64) -> (Vec<usize>, Observations<T>) {
    let mut rng = seeded(seed);
    let mut hidden: Vec<usize> = Vec::with_capacity(len);
    for k in 0..len {
        let x = if k == 0 {
            categorical(&mut rng, model.init())
        } else {
            categorical(&mut rng, &model.trans()[hidden[k - 1]])
        };
        hidden.push(x);
    }
    let obs = match model.emission() {
        Emission::Discrete { probs } => {
            Observations::Symbols(hidden.iter().map(|&x| categorical(&mut rng, &probs[x])).collect())
        }
        Emission::Gaussian { means, variances } => Observations::Reals(
            hidden
                .iter()
                .map(|&x| {
                    let n = Normal::new(means[x].as_f64(), variances[x].as_f64().sqrt()).expect("valid variance");
                    T::lit(n.sample(&mut rng))
                })
                .collect(),
        ),
    };
    (hidden, obs)
}
