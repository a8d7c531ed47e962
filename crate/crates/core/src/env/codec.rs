//! Base-(M+1) encoding of per-MDC channel assignments into one discrete action.

use crate::error::{Error, Result};

/// Channel index per MDC: 0 means unassigned, `1..=M` names a channel.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Allocation {
    pub per_mdc: Vec<usize>,
}

/// Encoded allocation `sum_n I_n (M+1)^(n-1)`, MDC 1 least significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AllocationAction(pub u64);

/// Size of the discrete action space, `(M+1)^N`.
pub fn action_count(n: usize, m: usize) -> Result<u64> {
    let base = (m as u64).checked_add(1);
    base.and_then(|b| b.checked_pow(u32::try_from(n).ok()?))
        .ok_or(Error::ActionSpaceTooLarge { m_plus_one: m + 1, n })
}

pub fn encode_allocation(alloc: &Allocation, m: usize) -> Result<AllocationAction> {
    let base = m as u64 + 1;
    let mut code = 0u64;
    let mut place = 1u64;
    for (mdc, &ch) in alloc.per_mdc.iter().enumerate() {
        if ch > m {
            return Err(Error::AllocationOutOfRange { mdc, value: ch, max: m });
        }
        code += ch as u64 * place;
        place = place.saturating_mul(base);
    }
    Ok(AllocationAction(code))
}

pub fn decode_allocation(action: AllocationAction, n: usize, m: usize) -> Result<Allocation> {
    let limit = action_count(n, m)?;
    if action.0 >= limit {
        return Err(Error::ActionOutOfRange { encoded: action.0, limit });
    }
    let base = m as u64 + 1;
    let mut rest = action.0;
    let per_mdc = (0..n)
        .map(|_| {
            let digit = (rest % base) as usize;
            rest /= base;
            digit
        })
        .collect();
    Ok(Allocation { per_mdc })
}

impl Allocation {
    /// One-hot `N x M` indicator matrix, row-major.
    pub fn one_hot(&self, m: usize) -> Vec<u8> {
        let mut out = vec![0u8; self.per_mdc.len() * m];
        for (n, &ch) in self.per_mdc.iter().enumerate() {
            if ch >= 1 && ch <= m {
                out[n * m + ch - 1] = 1;
            }
        }
        out
    }
}
