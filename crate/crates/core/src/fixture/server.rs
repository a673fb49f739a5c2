use std::io;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use tiny_http::{Header, Method, Request, Response, Server};

use super::Fixture;

const THREADS: usize = 4;

/// A running fixture endpoint. Stops when dropped.
pub struct FixtureServer {
    addr: SocketAddr,
    server: Arc<Server>,
    fixture: Arc<Fixture>,
    threads: Vec<JoinHandle<()>>,
}

impl FixtureServer {
    /// Bind `127.0.0.1:port` (0 picks a free port) and start serving.
    pub fn start(port: u16, fixture: Fixture) -> io::Result<FixtureServer> {
        Self::bind(&format!("127.0.0.1:{port}"), fixture)
    }

    pub fn bind(addr: &str, fixture: Fixture) -> io::Result<FixtureServer> {
        let server = Server::http(addr)
            .map_err(|e| io::Error::new(io::ErrorKind::AddrInUse, e.to_string()))?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| io::Error::other("not an IP listener"))?;
        let server = Arc::new(server);
        let fixture = Arc::new(fixture);
        let threads = (0..THREADS)
            .map(|_| {
                let server = Arc::clone(&server);
                let fixture = Arc::clone(&fixture);
                std::thread::spawn(move || {
                    while let Ok(request) = server.recv() {
                        handle(&fixture, request);
                    }
                })
            })
            .collect();
        Ok(FixtureServer {
            addr,
            server,
            fixture,
            threads,
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// The GraphQL endpoint URL.
    pub fn url(&self) -> String {
        format!("http://{}/graphql", self.addr)
    }

    pub fn fixture(&self) -> &Fixture {
        &self.fixture
    }

    /// Block the calling thread until the server stops.
    pub fn join(mut self) {
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        for _ in 0..self.threads.len() {
            self.server.unblock();
        }
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

fn json_header() -> Header {
    Header::from_bytes("Content-Type", "application/json").expect("static header")
}

fn handle(fixture: &Fixture, mut request: Request) {
    let path = request.url().split('?').next().unwrap_or("").to_owned();
    let response = match (request.method(), path.as_str()) {
        (Method::Get, "/health") => Response::from_string("ok").with_status_code(200),
        (Method::Post, "/graphql") | (Method::Post, "/") => {
            let mut body = String::new();
            if request.as_reader().read_to_string(&mut body).is_err() {
                body.clear();
            }
            let headers: Vec<(String, String)> = request
                .headers()
                .iter()
                .map(|h| (h.field.as_str().to_string(), h.value.as_str().to_owned()))
                .collect();
            let out = fixture.handle_body(&body, &headers);
            Response::from_string(out.body.to_string())
                .with_status_code(out.status)
                .with_header(json_header())
        }
        _ => Response::from_string("not found").with_status_code(404),
    };
    let _ = request.respond(response);
}
