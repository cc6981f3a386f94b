// slice: edge-invariance
// expect: reject RL0205
// rustc: error
fn store<'a, 'b>(dst: &mut &'a i32, src: &'b i32) {
    *dst = src;
}
