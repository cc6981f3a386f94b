// slice: accept
// expect: accept
// rustc: ok
// run: 3
fn main() -> i32 {
    let mut b = Box::new(1);
    b = Box::new(2);
    b = Box::new(3);
    return *b;
}
