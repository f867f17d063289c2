use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AutodiffError, ParamStore, Tape, Var};

/// Settings for comparing tape gradients against central differences.
#[derive(Clone, Debug)]
pub struct GradCheckConfig {
    /// Finite-difference step.
    pub step: f64,
    /// Maximum accepted relative error.
    pub tol: f64,
    /// Denominator floor for the relative error, so entries whose true
    /// gradient is zero are compared in absolute terms.
    pub floor: f64,
    /// Entries checked per tensor; `None` checks every entry. The entry
    /// with the largest analytic gradient is always included.
    pub samples_per_tensor: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            step: 1e-6,
            tol: 1e-4,
            floor: 1e-5,
            samples_per_tensor: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub checked: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub tensors: Vec<TensorCheck>,
    pub tol: f64,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.tensors
            .iter()
            .map(|t| t.max_rel_error)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.tensors.iter().all(|t| t.max_rel_error <= self.tol)
    }
}

fn eval<E, F>(store: &ParamStore, f: &F) -> Result<f64, E>
where
    E: From<AutodiffError>,
    F: Fn(&mut Tape<'_>) -> Result<Var, E>,
{
    let mut tape = Tape::new(store);
    let loss = f(&mut tape)?;
    let v = tape.value(loss);
    if !v.is_scalar() {
        return Err(AutodiffError::NonScalarLoss(v.shape().to_vec()).into());
    }
    Ok(v.item())
}

/// Compare reverse-mode gradients of the scalar built by `f` with central
/// differences, perturbing entries of `store` in place (restored afterwards).
pub fn grad_check<E, F>(store: &mut ParamStore, f: F, cfg: &GradCheckConfig) -> Result<GradCheckReport, E>
where
    E: From<AutodiffError>,
    F: Fn(&mut Tape<'_>) -> Result<Var, E>,
{
    grad_check_with(store, f, cfg, |_| {})
}

/// [`grad_check`] with a hook that can adjust the analytic tape before the
/// reverse sweep (used for fault-injection negative controls).
pub fn grad_check_with<E, F, H>(
    store: &mut ParamStore,
    f: F,
    cfg: &GradCheckConfig,
    prepare: H,
) -> Result<GradCheckReport, E>
where
    E: From<AutodiffError>,
    F: Fn(&mut Tape<'_>) -> Result<Var, E>,
    H: Fn(&mut Tape<'_>),
{
    let analytic = {
        let mut tape = Tape::new(store);
        prepare(&mut tape);
        let loss = f(&mut tape)?;
        tape.backward(loss)?
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ids: Vec<_> = store.ids().collect();
    let mut tensors = Vec::with_capacity(ids.len());
    for id in ids {
        let grad = analytic.get(id).data().to_vec();
        let len = grad.len();
        let mut entries: Vec<usize> = match cfg.samples_per_tensor {
            Some(k) if k < len => sample(&mut rng, len, k).into_vec(),
            _ => (0..len).collect(),
        };
        let argmax = (0..len)
            .max_by(|&a, &b| grad[a].abs().total_cmp(&grad[b].abs()))
            .unwrap_or(0);
        if !entries.contains(&argmax) {
            entries.push(argmax);
        }
        entries.sort_unstable();

        let mut max_rel: f64 = 0.0;
        let mut max_abs: f64 = 0.0;
        for &e in &entries {
            let orig = store.get(id).data()[e];
            store.get_mut(id).data_mut()[e] = orig + cfg.step;
            let plus = eval(store, &f);
            store.get_mut(id).data_mut()[e] = orig - cfg.step;
            let minus = eval(store, &f);
            store.get_mut(id).data_mut()[e] = orig;
            let numeric = (plus? - minus?) / (2.0 * cfg.step);
            let abs = (grad[e] - numeric).abs();
            let rel = abs / grad[e].abs().max(numeric.abs()).max(cfg.floor);
            max_abs = max_abs.max(abs);
            max_rel = max_rel.max(rel);
        }
        tensors.push(TensorCheck {
            name: store.name(id).to_string(),
            checked: entries.len(),
            max_rel_error: max_rel,
            max_abs_error: max_abs,
        });
    }
    Ok(GradCheckReport {
        tensors,
        tol: cfg.tol,
    })
}
