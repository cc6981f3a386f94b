// slice: reject
// expect: reject RL0201
// rustc: E0499
fn main() -> i32 {
    let mut x = 1;
    let a = &mut x;
    let b = &mut x;
    *a = 2;
    *b = 3;
    return x;
}
