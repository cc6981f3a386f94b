// slice: reject
// expect: reject RL0101
// rustc: E0382
enum Opt { Some(Box<i32>), None }

fn main() -> i32 {
    let o = Opt::Some(Box::new(1));
    match o {
        Opt::Some(b) => {
            let x = *b;
        }
        Opt::None => {}
    }
    match o {
        Opt::Some(b) => {
            return *b;
        }
        Opt::None => {
            return 0;
        }
    }
}
