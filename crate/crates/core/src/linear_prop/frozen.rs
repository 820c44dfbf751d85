use crate::error::{Error, Result};
use crate::generators::Family;
use crate::linear_prop::Partition;
use crate::measures::Curve;
use crate::scalar::Real;

/// Where coefficients are frozen on each subinterval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Freeze {
    /// `L_{t_j}` on `[t_j, t_{j+1}]`.
    #[default]
    LeftEndpoint,
    /// Time at the midpoint, moments averaged over the endpoints.
    Midpoint,
}

/// Time and moments at which the generator of one step is frozen.
#[derive(Clone, Debug, PartialEq)]
pub struct StepInput<T> {
    pub time: T,
    pub moments: Vec<T>,
}

impl<T: Real> StepInput<T> {
    /// One input per subinterval from a curve defined (at least) on the partition nodes.
    pub fn from_curve(family: &Family<T>, curve: &Curve<T>, partition: &Partition<T>, freeze: Freeze) -> Result<Vec<Self>> {
        let mut node_moments = Vec::with_capacity(partition.len());
        for &t in partition.nodes() {
            node_moments.push(family.moments(curve.at(t)?)?);
        }
        Ok(Self::from_node_moments(partition, &node_moments, freeze))
    }

    pub fn from_node_moments(partition: &Partition<T>, node_moments: &[Vec<T>], freeze: Freeze) -> Vec<Self> {
        let half = T::lit(0.5);
        (0..partition.steps())
            .map(|j| match freeze {
                Freeze::LeftEndpoint => StepInput {
                    time: partition.nodes()[j],
                    moments: node_moments[j].clone(),
                },
                Freeze::Midpoint => StepInput {
                    time: half * (partition.nodes()[j] + partition.nodes()[j + 1]),
                    moments: node_moments[j]
                        .iter()
                        .zip(&node_moments[j + 1])
                        .map(|(&a, &b)| half * (a + b))
                        .collect(),
                },
            })
            .collect()
    }

    /// Inputs for a family without measure dependence.
    pub fn unfrozen(family: &Family<T>, partition: &Partition<T>, freeze: Freeze) -> Result<Vec<Self>> {
        if !family.is_measure_independent() {
            return Err(Error::InvalidArgument("measure-dependent families need a frozen curve".into()));
        }
        let zero = vec![vec![T::zero(); family.functionals().len()]; partition.len()];
        Ok(Self::from_node_moments(partition, &zero, freeze))
    }
}
