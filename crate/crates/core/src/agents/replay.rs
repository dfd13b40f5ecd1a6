use rand::Rng;

use super::AgentError;
use crate::env::Observation;

/// Observation in replay storage; image values quantized to 16 bits.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredObs {
    pub image: Option<Vec<u16>>,
    pub vector: Vec<f32>,
}

const IMAGE_LEVELS: f32 = 65535.0;

impl StoredObs {
    pub fn from_observation(obs: &Observation) -> Self {
        Self {
            image: obs.image.as_ref().map(|img| {
                img.data
                    .iter()
                    .map(|v| (v.clamp(0.0, 1.0) * IMAGE_LEVELS).round() as u16)
                    .collect()
            }),
            vector: obs.vector(),
        }
    }

    pub fn image_values(&self) -> Option<impl Iterator<Item = f32> + '_> {
        self.image.as_ref().map(|img| img.iter().map(|v| f32::from(*v) / IMAGE_LEVELS))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: StoredObs,
    pub action: [f32; 3],
    pub reward: f32,
    pub next_obs: StoredObs,
    /// True only for terminal (success) transitions; time-limit truncation still bootstraps.
    pub done: bool,
}

/// Fixed-capacity FIFO with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    items: Vec<T>,
    cursor: usize,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Result<Self, AgentError> {
        if capacity == 0 {
            return Err(AgentError::Spec("replay capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            items: Vec::new(),
            cursor: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Insert, evicting the oldest item once full.
    pub fn push(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.cursor] = item;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    pub fn get(&self, index: usize) -> Option<&T> {
        self.items.get(index)
    }

    /// Contents from oldest to newest.
    pub fn iter_fifo(&self) -> impl Iterator<Item = &T> {
        let split = if self.items.len() < self.capacity { 0 } else { self.cursor };
        self.items[split..].iter().chain(&self.items[..split])
    }

    /// `n` storage indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>, AgentError> {
        if self.items.is_empty() {
            return Err(AgentError::Empty);
        }
        Ok((0..n).map(|_| rng.random_range(0..self.items.len())).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<&T>, AgentError> {
        Ok(self
            .sample_indices(n, rng)?
            .into_iter()
            .map(|i| &self.items[i])
            .collect())
    }
}

/// Uniform draw with replacement from a non-empty slice.
pub fn sample_uniform<'a, T, R: Rng + ?Sized>(items: &'a [T], n: usize, rng: &mut R) -> Vec<&'a T> {
    (0..n).map(|_| &items[rng.random_range(0..items.len())]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fifo_eviction() {
        let mut b = ReplayBuffer::new(2).unwrap();
        for c in ['a', 'b', 'c'] {
            b.push(c);
        }
        assert_eq!(b.iter_fifo().copied().collect::<Vec<_>>(), vec!['b', 'c']);
        b.push('d');
        assert_eq!(b.iter_fifo().copied().collect::<Vec<_>>(), vec!['c', 'd']);
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn single_item_is_repeated() {
        let mut b = ReplayBuffer::new(5).unwrap();
        b.push(7);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(b.sample(4, &mut rng).unwrap(), vec![&7; 4]);
    }

    #[test]
    fn empty_buffer_errors() {
        let b: ReplayBuffer<u8> = ReplayBuffer::new(3).unwrap();
        assert!(matches!(b.sample(1, &mut ChaCha8Rng::seed_from_u64(0)), Err(AgentError::Empty)));
        assert!(ReplayBuffer::<u8>::new(0).is_err());
    }

    #[test]
    fn sampling_is_uniform() {
        // 10⁵ draws over 4 items; each count within 3σ of n/4
        let mut b = ReplayBuffer::new(4).unwrap();
        for i in 0..4 {
            b.push(i);
        }
        let n = 100_000;
        let mut counts = [0usize; 4];
        for i in b.sample_indices(n, &mut ChaCha8Rng::seed_from_u64(9)).unwrap() {
            counts[i] += 1;
        }
        let mean = n as f64 / 4.0;
        let sd = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() <= 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn image_quantization_round_trip() {
        use crate::env::ImageTensor;
        let obs = Observation {
            image: Some(ImageTensor {
                channels: 1,
                height: 1,
                width: 3,
                data: vec![0.0, 0.5, 1.0],
            }),
            proprio: Some(vec![0.25]),
            target: None,
        };
        let s = StoredObs::from_observation(&obs);
        let back: Vec<f32> = s.image_values().unwrap().collect();
        for (a, b) in back.iter().zip([0.0, 0.5, 1.0]) {
            assert!((a - b).abs() <= 1.0 / 65535.0);
        }
        assert_eq!(s.vector, vec![0.25]);
    }
}
