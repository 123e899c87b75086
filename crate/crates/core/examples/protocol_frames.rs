//! What goes over the wire: framed requests, a site answering them, and a
//! refusal from a site below the disclosure threshold.

use fedboost::protocol::DisclosurePolicy;
use fedboost::protocol::{decode, encode, Request, RequestBody, Response};
use fedboost::site::{SiteDataset, SiteNode};
use ndarray::{array, Array1};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = array![
        [0., 1., 2.],
        [1., 1., 0.],
        [2., 0., 1.],
        [0., 2., 2.],
        [1., 0., 0.],
        [2., 2., 1.]
    ];
    let y = Array1::from(vec![1., 0., 1., 0., 0., 1.]);
    let data = SiteDataset::new(x, y)?;

    let mut site = SiteNode::new("demo", data.clone(), DisclosurePolicy { min_site_n: 5 });
    let requests = [
        RequestBody::Describe,
        RequestBody::StandardizeLocal,
        RequestBody::UnivariableStats,
        RequestBody::CovarianceBlock {
            pairs: vec![(0, 1), (0, 2)],
        },
    ];
    for (id, body) in requests.into_iter().enumerate() {
        let frame = encode(&Request {
            request_id: id as u64,
            body,
        })?;
        println!(">> {}", String::from_utf8_lossy(&frame[4..]));
        let reply: Response = decode(&site.handle_frame(&frame)?)?;
        println!("<< {:?}", reply.body);
    }

    let mut small = SiteNode::new("small", data, DisclosurePolicy { min_site_n: 50 });
    let reply = small.handle(&Request {
        request_id: 9,
        body: RequestBody::UnivariableStats,
    });
    println!("small site: {:?}", reply.body);
    Ok(())
}
