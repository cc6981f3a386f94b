// slice: accept
// expect: accept
// rustc: ok
// run: 7
enum Opt { Some(Box<i32>), None }

fn unwrap_or(o: Opt, d: i32) -> i32 {
    match o {
        Opt::Some(b) => {
            return *b;
        }
        Opt::None => {
            return d;
        }
    }
}

fn main() -> i32 {
    let a = Opt::Some(Box::new(4));
    let b = Opt::None;
    return unwrap_or(a, 0) + unwrap_or(b, 3);
}
