// slice: reject
// expect: reject RL0206
// rustc: E0515
fn dangle<'a>(x: &'a i32) -> &'a i32 {
    let y = *x + 1;
    return &y;
}
