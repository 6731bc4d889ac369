use super::scalar::Scalar;
use super::Parameters;

/// One RMSProp step on a scalar: returns `(param', cache')`.
pub fn rmsprop_update(
    param: f64,
    grad: f64,
    cache: f64,
    lr: f64,
    rho: f64,
    epsilon: f64,
) -> (f64, f64) {
    let cache = rho * cache + (1.0 - rho) * grad * grad;
    (param - lr * grad / (cache.sqrt() + epsilon), cache)
}

/// RMSProp over a slice, in place.
pub fn rmsprop_update_slice<F: Scalar>(
    param: &mut [F],
    grad: &[F],
    cache: &mut [F],
    lr: F,
    rho: F,
    epsilon: F,
) {
    let one = F::one();
    for ((p, &g), c) in param.iter_mut().zip(grad).zip(cache.iter_mut()) {
        *c = rho * *c + (one - rho) * g * g;
        *p = *p - lr * g / (c.sqrt() + epsilon);
    }
}

/// Optimizer state: one mean-square cache per parameter tensor.
#[derive(Debug, Clone)]
pub struct RmsProp<F> {
    caches: Vec<Vec<F>>,
    lr: F,
    rho: F,
    epsilon: F,
}

impl<F: Scalar> RmsProp<F> {
    pub fn new<P: Parameters<F>>(params: &P, lr: f64, rho: f64, epsilon: f64) -> Self {
        RmsProp {
            caches: params
                .tensors()
                .iter()
                .map(|t| vec![F::zero(); t.len()])
                .collect(),
            lr: F::from_f64(lr),
            rho: F::from_f64(rho),
            epsilon: F::from_f64(epsilon),
        }
    }

    pub fn step<P: Parameters<F>>(&mut self, params: &mut P, grads: &P) {
        for ((p, g), c) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.caches.iter_mut())
        {
            rmsprop_update_slice(p, g, c, self.lr, self.rho, self.epsilon);
        }
    }
}

/// Rescales `grads` so their global L2 norm is at most `max_norm`; returns
/// the norm before clipping.
pub fn clip_global_norm<F: Scalar, P: Parameters<F>>(grads: &mut P, max_norm: f64) -> f64 {
    let norm = grads
        .tensors()
        .iter()
        .flat_map(|t| t.iter())
        .map(|&g| g.to_f64() * g.to_f64())
        .sum::<f64>()
        .sqrt();
    if norm > max_norm {
        let s = F::from_f64(max_norm / norm);
        for t in grads.tensors_mut() {
            for g in t.iter_mut() {
                *g = *g * s;
            }
        }
    }
    norm
}
