// slice: reject
// expect: reject RL0202
// rustc: E0503
fn main() -> i32 {
    let mut x = 1;
    let m = &mut x;
    let y = x;
    *m = 2;
    return y;
}
