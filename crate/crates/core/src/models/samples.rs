use crate::data::LabeledSample;

/// Training and validation samples addressed by one index space: indices below
/// `train.len()` refer to `train`, the rest to `val`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SampleView<'a> {
    pub train: &'a [LabeledSample],
    pub val: &'a [LabeledSample],
}

impl<'a> SampleView<'a> {
    pub fn get(&self, i: usize) -> &'a LabeledSample {
        if i < self.train.len() {
            &self.train[i]
        } else {
            &self.val[i - self.train.len()]
        }
    }
}
