use crate::error::{invalid, Result};
use crate::net::{CouplingGraph, SiteId};

pub(crate) fn check_chain_length(m: usize) -> Result<()> {
    if m < 5 || m % 2 == 0 {
        return Err(invalid(format!(
            "chain length must be odd and at least 5, got {m}"
        )));
    }
    Ok(())
}

/// Mirror-symmetric perfect-transfer couplings `K_n = √(n(M−n)/2)`,
/// `n = 1..M−1`. With this normalisation `M = 5` gives `(√2, √3, √3, √2)`
/// and every member of the family transfers end to end at `t0 = π/√2`.
pub fn pst_chain_couplings(m: usize) -> Result<Vec<f64>> {
    check_chain_length(m)?;
    Ok((1..m).map(|n| ((n * (m - n)) as f64 / 2.0).sqrt()).collect())
}

/// Open chain with sites `1..=couplings.len()+1`.
pub fn chain_graph(couplings: &[f64]) -> Result<CouplingGraph> {
    let n = couplings.len() + 1;
    CouplingGraph::new(
        (1..=n).map(SiteId::Index).collect(),
        couplings
            .iter()
            .enumerate()
            .map(|(i, &k)| (SiteId::Index(i + 1), SiteId::Index(i + 2), k)),
    )
}

pub fn pst_chain(m: usize) -> Result<CouplingGraph> {
    chain_graph(&pst_chain_couplings(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_site_values() {
        let k = pst_chain_couplings(5).unwrap();
        assert_eq!(k, vec![2f64.sqrt(), 3f64.sqrt(), 3f64.sqrt(), 2f64.sqrt()]);
    }

    #[test]
    fn mirror_symmetric_for_all_lengths() {
        for m in (5..=41).step_by(2) {
            let k = pst_chain_couplings(m).unwrap();
            assert_eq!(k.len(), m - 1);
            for n in 0..k.len() {
                assert_eq!(k[n], k[k.len() - 1 - n]);
            }
        }
    }

    #[test]
    fn rejects_bad_lengths() {
        for m in [0, 1, 3, 4, 6, 10] {
            assert!(pst_chain_couplings(m).is_err());
        }
    }
}
