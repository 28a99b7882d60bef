//! Base-2 digital net (Sobol' construction) with a random digital shift.

/// Maximum dimension covered by the bundled direction numbers.
pub const MAX_DIMENSION: usize = 32;

const BITS: usize = 32;

// Joe & Kuo primitive polynomial data for dimensions 2..=32:
// (degree s, interior coefficients a, initial direction integers m_1..m_s).
const PRIMITIVE_DATA: [(usize, u32, &[u32]); MAX_DIMENSION - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
    (7, 7, &[1, 1, 3, 13, 7, 35, 63]),
    (7, 8, &[1, 3, 5, 9, 1, 25, 53]),
    (7, 14, &[1, 3, 1, 13, 9, 35, 107]),
    (7, 19, &[1, 3, 1, 5, 27, 61, 31]),
    (7, 21, &[1, 1, 5, 11, 19, 41, 61]),
    (7, 28, &[1, 3, 5, 3, 3, 13, 69]),
    (7, 31, &[1, 1, 7, 13, 1, 19, 1]),
    (7, 32, &[1, 3, 7, 5, 13, 19, 59]),
    (7, 37, &[1, 1, 3, 9, 25, 29, 41]),
    (7, 41, &[1, 3, 5, 13, 23, 1, 55]),
    (7, 42, &[1, 3, 7, 3, 13, 59, 17]),
];

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = PRIMITIVE_DATA[dim - 1];
    for k in 0..s {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for i in 1..s {
            if (a >> (s - 1 - i)) & 1 == 1 {
                x ^= v[k - i];
            }
        }
        v[k] = x;
    }
    v
}

/// Unshifted Sobol' net in gray-code order.
#[derive(Debug, Clone)]
pub(crate) struct DigitalNet {
    directions: Vec<[u32; BITS]>,
}

impl DigitalNet {
    pub(crate) fn new(dimension: usize) -> Self {
        debug_assert!((1..=MAX_DIMENSION).contains(&dimension));
        DigitalNet {
            directions: (0..dimension).map(direction_numbers).collect(),
        }
    }

    pub(crate) fn dimension(&self) -> usize {
        self.directions.len()
    }

    /// Integer coordinates of point `index` written into `out`.
    pub(crate) fn point_bits(&self, index: u32, out: &mut [u32]) {
        let gray = index ^ (index >> 1);
        for (o, dirs) in out.iter_mut().zip(&self.directions) {
            let mut x = 0u32;
            let mut g = gray;
            let mut c = 0;
            while g != 0 {
                if g & 1 == 1 {
                    x ^= dirs[c];
                }
                g >>= 1;
                c += 1;
            }
            *o = x;
        }
    }

    /// Fills `out` (row-major, `count` rows) with integer coordinates for
    /// indices `start..start + count`, stepping the gray code incrementally.
    pub(crate) fn fill_bits(&self, start: u32, count: usize, out: &mut [u32]) {
        let d = self.dimension();
        if count == 0 {
            return;
        }
        let mut current = vec![0u32; d];
        self.point_bits(start, &mut current);
        out[..d].copy_from_slice(&current);
        for r in 1..count {
            // Moving from index i-1 to i flips the bit at trailing_zeros(i).
            let i = start + r as u32;
            let c = i.trailing_zeros() as usize;
            for (x, dirs) in current.iter_mut().zip(&self.directions) {
                *x ^= dirs[c];
            }
            out[r * d..(r + 1) * d].copy_from_slice(&current);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unshifted(net: &DigitalNet, n: usize) -> Vec<f64> {
        let mut bits = vec![0u32; n * net.dimension()];
        net.fill_bits(0, n, &mut bits);
        bits.iter().map(|&b| b as f64 / 4294967296.0).collect()
    }

    #[test]
    fn first_points_match_reference_sobol() {
        // First eight unscrambled points of the standard 3-d Sobol' sequence.
        let expected = [
            [0.0, 0.0, 0.0],
            [0.5, 0.5, 0.5],
            [0.75, 0.25, 0.25],
            [0.25, 0.75, 0.75],
            [0.375, 0.375, 0.625],
            [0.875, 0.875, 0.125],
            [0.625, 0.125, 0.875],
            [0.125, 0.625, 0.375],
        ];
        let got = unshifted(&DigitalNet::new(3), 8);
        for (i, row) in expected.iter().enumerate() {
            assert_eq!(&got[3 * i..3 * i + 3], row, "row {i}");
        }
    }

    #[test]
    fn incremental_matches_direct() {
        let net = DigitalNet::new(MAX_DIMENSION);
        let mut bulk = vec![0u32; 100 * MAX_DIMENSION];
        net.fill_bits(37, 100, &mut bulk);
        let mut one = vec![0u32; MAX_DIMENSION];
        for r in 0..100 {
            net.point_bits(37 + r as u32, &mut one);
            assert_eq!(&bulk[r * MAX_DIMENSION..(r + 1) * MAX_DIMENSION], &one[..]);
        }
    }

    #[test]
    fn every_dimension_is_a_0_m_net_in_one_dimension() {
        // Each 1-d projection of the first 2^m points hits every dyadic cell once.
        let net = DigitalNet::new(MAX_DIMENSION);
        let m = 10;
        let n = 1usize << m;
        let mut bits = vec![0u32; n * MAX_DIMENSION];
        net.fill_bits(0, n, &mut bits);
        for j in 0..MAX_DIMENSION {
            let mut seen = vec![false; n];
            for i in 0..n {
                let cell = (bits[i * MAX_DIMENSION + j] >> (32 - m)) as usize;
                assert!(!seen[cell], "dim {j} cell {cell} hit twice");
                seen[cell] = true;
            }
        }
    }
}
