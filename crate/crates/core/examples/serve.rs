// Start the HTTP service on an ephemeral port, query it, reload a new
// dataset and query again. Responses carry the snapshot stamp.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};

use sitelens::service::{serve, ServiceState};

fn get(addr: SocketAddr, path: &str) -> String {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(stream, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    response.split_once("\r\n\r\n").map(|(_, body)| body.to_owned()).unwrap_or_default()
}

#[tokio::main]
async fn main() {
    let state = ServiceState::load(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nrw")).unwrap();
    let handle = serve(state.clone(), "127.0.0.1:0").await.unwrap();
    let addr = handle.addr;
    println!("listening on http://{addr}");

    let body = tokio::task::spawn_blocking(move || get(addr, "/api/sites/NRW/children")).await.unwrap();
    println!("{body}");

    let dir = std::env::temp_dir().join(format!("sitelens-serve-example-{}", std::process::id()));
    sitelens::ingest::generate_synthetic(&[1, 3], 1, 1, 7).write(&dir).unwrap();
    let snap = state.reload(Some(dir.clone())).await.unwrap();
    println!("reloaded: stamp {}", snap.provenance().stamp);
    let body = tokio::task::spawn_blocking(move || get(addr, "/api/health")).await.unwrap();
    println!("{body}");

    std::fs::remove_dir_all(dir).ok();
    handle.shutdown().await.unwrap();
}
