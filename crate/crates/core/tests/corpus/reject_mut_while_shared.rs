// slice: reject
// expect: reject RL0201
// rustc: E0502
fn main() -> i32 {
    let mut x = 1;
    let r = &x;
    let m = &mut x;
    *m = 2;
    return *r;
}
