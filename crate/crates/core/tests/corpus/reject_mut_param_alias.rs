// slice: reject
// expect: reject RL0201
// rustc: E0499
fn both(a: &mut i32, b: &mut i32) {
    *a = 1;
    *b = 2;
}

fn main() -> i32 {
    let mut x = 0;
    both(&mut x, &mut x);
    return x;
}
