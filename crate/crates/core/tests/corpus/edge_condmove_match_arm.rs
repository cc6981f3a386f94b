// slice: edge-condmove
// expect: accept
// rustc: ok
// run: 7
enum Opt { Some(Box<i32>), None }

fn consume(b: Box<i32>) -> i32 {
    return *b;
}

fn main() -> i32 {
    let o = Opt::Some(Box::new(3));
    let extra = Box::new(4);
    let mut n = 0;
    match o {
        Opt::Some(b) => {
            n = consume(b) + consume(extra);
        }
        Opt::None => {}
    }
    return n;
}
