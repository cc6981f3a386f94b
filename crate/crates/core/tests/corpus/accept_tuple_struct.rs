// slice: accept
// expect: accept
// rustc: ok
// run: 12
struct Wrap(i32, Box<i32>);

fn main() -> i32 {
    let w = Wrap(3, Box::new(4));
    let r = &w.1;
    return w.0 * **r;
}
