use rand::{Rng, RngCore};

use super::{GridDomain, GridPoint, Proposal, Target};
use crate::error::{invalid, Error, Result};

/// A distribution tabulated over every node of a [`GridDomain`].
///
/// The table holds unnormalized log mass; the normalizer is the exact sum
/// over the grid, so the normalized pmf sums to one by construction.
#[derive(Debug, Clone)]
pub struct GridDistribution {
    domain: GridDomain,
    log_mass: Vec<f64>,
    log_z: f64,
    cdf: Vec<f64>,
}

impl GridDistribution {
    pub fn from_log_mass(domain: GridDomain, log_mass: Vec<f64>) -> Result<Self> {
        if log_mass.len() != domain.len() {
            return Err(invalid(format!(
                "table has {} entries, grid has {} nodes",
                log_mass.len(),
                domain.len()
            )));
        }
        if log_mass.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(invalid("log mass table contains NaN or +inf"));
        }
        let peak = log_mass.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return Err(invalid("grid distribution has no mass"));
        }
        let scaled: Vec<f64> = log_mass.iter().map(|v| (v - peak).exp()).collect();
        let total: f64 = scaled.iter().sum();
        let log_z = peak + total.ln();
        let mut acc = 0.0;
        let cdf = scaled
            .iter()
            .map(|v| {
                acc += v / total;
                acc
            })
            .collect();
        Ok(Self {
            domain,
            log_mass,
            log_z,
            cdf,
        })
    }

    /// Tabulate `log_mass_at(position)` at every node.
    pub fn from_fn(domain: GridDomain, log_mass_at: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let table = domain
            .points()
            .map(|p| log_mass_at(&domain.position(&p)))
            .collect();
        Self::from_log_mass(domain, table)
    }

    /// Build from nonnegative linear weights.
    pub fn from_weights(domain: GridDomain, weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| *w < 0.0) {
            return Err(invalid("weights must be nonnegative"));
        }
        Self::from_log_mass(domain, weights.iter().map(|w| w.ln()).collect())
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    /// Normalized probability of a node; zero off the grid.
    pub fn pmf(&self, x: &GridPoint) -> f64 {
        if !self.domain.contains(x) {
            return 0.0;
        }
        (self.log_mass[self.domain.index(x)] - self.log_z).exp()
    }

    pub fn pmf_table(&self) -> Vec<f64> {
        self.log_mass
            .iter()
            .map(|v| (v - self.log_z).exp())
            .collect()
    }

    /// Exact expectation `Σ f(x) P(x)` by summation over every node.
    pub fn expectation(&self, f: impl Fn(&GridPoint) -> f64) -> f64 {
        self.domain
            .points()
            .zip(self.pmf_table())
            .filter(|(_, p)| *p > 0.0)
            .map(|(x, p)| f(&x) * p)
            .sum()
    }

    /// Discrete entropy `-Σ p ln p` in nats.
    pub fn entropy(&self) -> f64 {
        self.pmf_table()
            .into_iter()
            .filter(|p| *p > 0.0)
            .map(|p| -p * p.ln())
            .sum()
    }

    /// Inverse-CDF draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> GridPoint {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|c| *c <= u);
        self.domain.point(idx.min(self.cdf.len() - 1))
    }
}

impl Target<GridPoint> for GridDistribution {
    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn log_mass(&self, x: &GridPoint) -> f64 {
        if self.domain.contains(x) {
            self.log_mass[self.domain.index(x)]
        } else {
            f64::NEG_INFINITY
        }
    }

    fn log_normalizer(&self) -> Option<f64> {
        Some(self.log_z)
    }

    fn sample_exact(&self, rng: &mut dyn RngCore) -> Option<GridPoint> {
        Some(self.draw(rng))
    }
}

impl Proposal<GridPoint> for GridDistribution {
    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> GridPoint {
        self.draw(rng)
    }

    fn log_density(&self, x: &GridPoint) -> f64 {
        Target::log_mass(self, x) - self.log_z
    }
}

/// Gaussian with diagonal covariance evaluated at the grid nodes and
/// normalized by exact summation over the grid.
pub fn make_discretized_gaussian(
    domain: GridDomain,
    mean: &[f64],
    var: &[f64],
) -> Result<GridDistribution> {
    let n = domain.dim();
    if mean.len() != n || var.len() != n {
        return Err(invalid("mean/variance length must match grid dimension"));
    }
    if let Some((k, v)) = var
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0) || !v.is_finite())
    {
        return Err(Error::DegenerateCovariance(*v, k));
    }
    let mean = mean.to_vec();
    let var = var.to_vec();
    GridDistribution::from_fn(domain, move |x| {
        -0.5 * x
            .iter()
            .zip(mean.iter().zip(&var))
            .map(|(xi, (m, v))| (xi - m) * (xi - m) / v)
            .sum::<f64>()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table1_target() -> GridDistribution {
        make_discretized_gaussian(
            GridDomain::cube(2, -10, 10).unwrap(),
            &[0.0, 0.0],
            &[1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn pmf_sums_to_one() {
        let p = table1_target();
        let total: f64 = p.pmf_table().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(p.domain().len(), 441);
    }

    #[test]
    fn unimodal_at_origin() {
        let p = table1_target();
        assert!(p.pmf(&GridPoint::new(vec![0, 0])) > p.pmf(&GridPoint::new(vec![10, 10])));
    }

    #[test]
    fn entropy_and_neg_log_variance() {
        // Independent check: the grid entropy equals Σ_k over two independent
        // 1-D discretized normals, and Var(-ln p) sums over axes likewise.
        let p = table1_target();
        let one_d: Vec<f64> = (-10..=10)
            .map(|i: i64| (-0.5 * (i * i) as f64).exp())
            .collect();
        let z: f64 = one_d.iter().sum();
        let h1: f64 = one_d.iter().map(|w| -(w / z) * (w / z).ln()).sum();
        assert!((p.entropy() - 2.0 * h1).abs() < 1e-12);
        assert!(
            (p.entropy() - 2.838).abs() < 5e-4,
            "entropy {}",
            p.entropy()
        );

        let mean = p.entropy();
        let var = p.expectation(|x| {
            let v = -p.pmf(x).ln() - mean;
            v * v
        });
        // Var(-ln p) ≈ 1 for discretized N(0, I₂), so DS stdev at t = 100 is ≈ 0.1.
        assert!((var - 1.0).abs() < 1e-3, "var {var}");
    }

    #[test]
    fn degenerate_covariance_rejected() {
        let d = GridDomain::cube(2, -3, 3).unwrap();
        assert!(matches!(
            make_discretized_gaussian(d, &[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::DegenerateCovariance(_, 1))
        ));
    }

    #[test]
    fn index_round_trip() {
        let d = GridDomain::new(vec![-2, 0, 5], vec![1, 3, 6], 0.5).unwrap();
        for i in 0..d.len() {
            assert_eq!(d.index(&d.point(i)), i);
        }
    }

    #[test]
    fn draws_follow_pmf() {
        let d = GridDomain::cube(1, 0, 3).unwrap();
        let p = GridDistribution::from_weights(d, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0usize; 4];
        let draws = 100_000;
        for _ in 0..draws {
            counts[p.draw(&mut rng).coords[0] as usize] += 1;
        }
        for (k, c) in counts.iter().enumerate() {
            let pk = (k + 1) as f64 / 10.0;
            let se = (pk * (1.0 - pk) / draws as f64).sqrt();
            assert!((*c as f64 / draws as f64 - pk).abs() < 5.0 * se);
        }
    }

    #[test]
    fn zero_weight_nodes_have_no_mass() {
        let d = GridDomain::cube(1, 0, 2).unwrap();
        let p = GridDistribution::from_weights(d, &[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.pmf(&GridPoint::new(vec![0])), 0.0);
        assert_eq!(
            Target::log_mass(&p, &GridPoint::new(vec![0])),
            f64::NEG_INFINITY
        );
    }
}
