//! Brute-force reference implementations shared by the integration tests.
//!
//! Everything here is written straight from the metric and cleansing
//! definitions with plain loops and integer fractions. It shares no code
//! with the library beyond the public record type used for input.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDateTime;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use shillbid_core::model::{BidRecord, Money};

pub const HEADERS: [&str; 15] = [
    "Auction URL",
    "Seller Name",
    "Bidder ID",
    "Bid Amount",
    "Bid Date",
    "Bid Time",
    "Auction Start Date",
    "Auction Start Time",
    "Auction End Date",
    "Auction End Time",
    "Auction Duration",
    "Starting Price",
    "Winning Price",
    "Number of Bids",
    "Number of Bidders",
];

/// One cleaned bid row, mirroring the preprocessed CSV columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub record_id: u64,
    pub auction_id: u64,
    pub seller: String,
    pub bidder: String,
    pub amount: i64,
    pub t: u64,
    pub num_bidders: u64,
    pub num_bids: u64,
    pub starting: i64,
    pub winning: i64,
    pub duration: u64,
    pub start: u64,
    pub end: u64,
}

impl Row {
    pub fn from_record(r: &BidRecord) -> Row {
        Row {
            record_id: r.record_id,
            auction_id: r.auction_id,
            seller: r.seller_id.clone(),
            bidder: r.bidder_id.clone(),
            amount: r.bid_amount.cents(),
            t: r.bid_submit_time_sec,
            num_bidders: r.num_bidders as u64,
            num_bids: r.num_bids as u64,
            starting: r.starting_price.cents(),
            winning: r.winning_bid.cents(),
            duration: r.auction_duration_sec,
            start: r.start_time_sec,
            end: r.end_time_sec,
        }
    }

    pub fn to_record(&self) -> BidRecord {
        BidRecord {
            record_id: self.record_id,
            auction_id: self.auction_id,
            seller_id: self.seller.clone(),
            bidder_id: self.bidder.clone(),
            bid_amount: Money::from_cents(self.amount),
            bid_submit_time_sec: self.t,
            num_bidders: self.num_bidders as u32,
            num_bids: self.num_bids as u32,
            starting_price: Money::from_cents(self.starting),
            winning_bid: Money::from_cents(self.winning),
            auction_duration_sec: self.duration,
            start_time_sec: self.start,
            end_time_sec: self.end,
        }
    }
}

/// Non-negative fraction kept unreduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac {
    pub num: i64,
    pub den: i64,
}

impl Frac {
    pub const ZERO: Frac = Frac { num: 0, den: 1 };

    pub fn new(num: i64, den: i64) -> Frac {
        assert!(den > 0, "zero denominator");
        Frac { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn same_value(self, num: i64, den: i64) -> bool {
        self.num as i128 * den as i128 == num as i128 * self.den as i128
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub auction_id: u64,
    pub bidder: String,
    /// BT, EB, BR, LB, ASP, SOB, WR, AB
    pub values: [Frac; 8],
}

pub fn cents_text(c: i64) -> String {
    format!("{}.{:02}", c / 100, c % 100)
}

pub fn fixed6(f: Frac) -> String {
    format!("{:.6}", f.to_f64() + 0.0)
}

/// Longest stretch of consecutive entries equal to `who`.
pub fn longest_run(seq: &[&str], who: &str) -> u32 {
    let mut best = 0;
    for i in 0..seq.len() {
        let mut j = i;
        while j < seq.len() && seq[j] == who {
            j += 1;
        }
        best = best.max((j - i) as u32);
    }
    best
}

pub fn sob_band(run: u32) -> Frac {
    if run >= 4 {
        Frac::new(1, 1)
    } else if run == 3 {
        Frac::new(1, 2)
    } else {
        Frac::ZERO
    }
}

/// Bids of one auction in time order: earliest (largest countdown) first,
/// ties by amount then record id.
fn chronological(rows: &[&Row]) -> Vec<Row> {
    let mut v: Vec<Row> = rows.iter().map(|r| (*r).clone()).collect();
    v.sort_by_key(|r| (std::cmp::Reverse(r.t), r.amount, r.record_id));
    v
}

/// All eight metrics for every (auction, bidder) pair, ordered by auction id
/// then bidder id.
pub fn metrics(rows: &[Row]) -> Vec<Instance> {
    let mut by_auction: BTreeMap<u64, Vec<&Row>> = BTreeMap::new();
    for r in rows {
        by_auction.entry(r.auction_id).or_default().push(r);
    }
    let auctions: Vec<(u64, Vec<Row>)> = by_auction.iter().map(|(id, v)| (*id, chronological(v))).collect();
    let n = auctions.len() as i64;
    let start_sum: i64 = auctions.iter().map(|(_, b)| b[0].starting).sum();
    let bids_sum: i64 = auctions.iter().map(|(_, b)| b[0].num_bids as i64).sum();

    let winner = |bids: &[Row]| bids.last().unwrap().bidder.clone();
    let count_in = |bids: &[Row], who: &str| bids.iter().filter(|b| b.bidder == who).count() as i64;

    let mut out = Vec::new();
    for (id, bids) in &auctions {
        let head = &bids[0];
        let bidders: BTreeSet<&str> = bids.iter().map(|b| b.bidder.as_str()).collect();
        let seq: Vec<&str> = bids.iter().map(|b| b.bidder.as_str()).collect();
        for who in bidders {
            let mine: Vec<&Row> = bids.iter().filter(|b| b.bidder == who).collect();

            let all = auctions.iter().filter(|(_, b)| count_in(b, who) > 0).count() as i64;
            let with_seller =
                auctions.iter().filter(|(_, b)| count_in(b, who) > 0 && b[0].seller == head.seller).count() as i64;
            let bt = if all > 1 { Frac::new(with_seller, all) } else { Frac::ZERO };

            let first = mine.iter().map(|b| b.t).max().unwrap() as i64;
            let last = mine.iter().map(|b| b.t).min().unwrap() as i64;
            let dur = head.duration as i64;
            let eb = Frac::new(dur - (head.start as i64 - first), dur);
            let lb = Frac::new(last - head.end as i64, dur);
            let br = Frac::new(mine.len() as i64, head.num_bids as i64);

            let sp = head.starting;
            let asp = if sp * n < start_sum { Frac::new(start_sum - sp * n, start_sum) } else { Frac::ZERO };

            let sob = sob_band(longest_run(&seq, who));

            let mut high = 0;
            let mut high_won = 0;
            for (_, b) in &auctions {
                let c = count_in(b, who);
                if c > 0 && c * 10 > b[0].num_bids as i64 {
                    high += 1;
                    if winner(b) == who {
                        high_won += 1;
                    }
                }
            }
            let wr = if high == 0 { Frac::ZERO } else { Frac::new(high - high_won, high) };

            let nb = head.num_bids as i64;
            let ab = if nb * n > bids_sum { Frac::new(nb * n - bids_sum, nb * n) } else { Frac::ZERO };

            out.push(Instance { auction_id: *id, bidder: who.to_string(), values: [bt, eb, br, lb, asp, sob, wr, ab] });
        }
    }
    out
}

pub fn sb_csv(instances: &[Instance]) -> String {
    let mut s = String::from(
        "auction_id,bidder_id,bidder_tendency,early_bidding,bidding_ratio,last_bidding,\
         auction_starting_price,successive_outbidding,winning_ratio,auction_bids\n",
    );
    for i in instances {
        s.push_str(&format!("{},{}", i.auction_id, i.bidder));
        for v in i.values {
            s.push(',');
            s.push_str(&fixed6(v));
        }
        s.push('\n');
    }
    s
}

pub fn preprocessed_csv(rows: &[Row]) -> String {
    let mut sorted: Vec<&Row> = rows.iter().collect();
    sorted.sort_by_key(|r| (r.auction_id, std::cmp::Reverse(r.t), r.record_id));
    let mut s = String::from(
        "record_id,auction_id,seller_id,bidder_id,bid_amount,bid_submit_time_sec,num_bidders,num_bids,\
         starting_price,winning_bid,auction_duration_sec,start_time_sec,end_time_sec\n",
    );
    for r in sorted {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.record_id,
            r.auction_id,
            r.seller,
            r.bidder,
            cents_text(r.amount),
            r.t,
            r.num_bidders,
            r.num_bids,
            cents_text(r.starting),
            cents_text(r.winning),
            r.duration,
            r.start,
            r.end
        ));
    }
    s
}

/// Keeps digits and the decimal point: "US $1,234.50" and "650.50 $" both
/// reduce to a plain decimal.
pub fn price_cents(text: &str) -> i64 {
    let plain: String = text.chars().filter(|c| c.is_ascii_digit() || *c == '.').collect();
    let (whole, frac) = plain.split_once('.').unwrap_or((&plain, ""));
    let frac = format!("{frac:0<2}");
    whole.parse::<i64>().unwrap() * 100 + frac[..2].parse::<i64>().unwrap()
}

pub fn timestamp(date: &str, time: &str) -> NaiveDateTime {
    let clock = time.split_whitespace().next().unwrap();
    NaiveDateTime::parse_from_str(&format!("{date} {clock}"), "%b-%d-%y %H:%M:%S")
        .unwrap_or_else(|e| panic!("{date} {time}: {e}"))
}

struct Parsed {
    url: String,
    seller: String,
    bidder: String,
    amount: i64,
    t: u64,
    start: u64,
    end: u64,
    duration: u64,
    starting: i64,
    winning: i64,
}

/// Cleans a raw scrape in the documented order. Panics on malformed
/// values; it is only fed well-formed fixtures.
pub fn preprocess(raw_csv: &str, epoch: NaiveDateTime, min_bids: usize) -> Vec<Row> {
    let mut reader = csv::ReaderBuilder::new().from_reader(raw_csv.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_string).collect();
    let idx: Vec<usize> = HEADERS.iter().map(|h| header.iter().position(|c| c == h).unwrap()).collect();

    let mut seen = BTreeSet::new();
    let mut kept: Vec<Vec<String>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let projected: Vec<String> = idx.iter().map(|&i| rec[i].to_string()).collect();
        if seen.insert(projected.clone()) {
            kept.push(projected);
        }
    }
    kept.retain(|r| !r[2].trim().is_empty());

    let countdown = |d: &str, t: &str| (epoch - timestamp(d, t)).num_seconds() as u64;
    let parsed: Vec<Parsed> = kept
        .iter()
        .map(|r| Parsed {
            url: r[0].clone(),
            seller: r[1].clone(),
            bidder: r[2].clone(),
            amount: price_cents(&r[3]),
            t: countdown(&r[4], &r[5]),
            start: countdown(&r[6], &r[7]),
            end: countdown(&r[8], &r[9]),
            duration: r[10].split_whitespace().next().unwrap().parse::<u64>().unwrap() * 86_400,
            starting: price_cents(&r[11]),
            winning: price_cents(&r[12]),
        })
        .collect();

    let mut groups: BTreeMap<&str, Vec<&Parsed>> = BTreeMap::new();
    for p in &parsed {
        groups.entry(p.url.as_str()).or_default().push(p);
    }
    let mut auctions: Vec<(&str, Vec<&Parsed>)> = Vec::new();
    for (url, mut bids) in groups {
        if bids.len() < min_bids {
            continue;
        }
        bids.sort_by(|a, b| b.t.cmp(&a.t).then(a.amount.cmp(&b.amount)).then(a.bidder.cmp(&b.bidder)));
        let h = bids[0];
        let last = bids.last().unwrap();
        let consistent = last.amount == h.winning
            && h.starting <= h.winning
            && h.winning > 0
            && bids.iter().all(|b| b.amount <= h.winning && b.t >= h.end && b.t <= h.start)
            && h.start >= h.end
            && h.start - h.end == h.duration;
        if consistent {
            auctions.push((url, bids));
        }
    }
    auctions.sort_by(|a, b| b.1[0].start.cmp(&a.1[0].start).then(a.0.cmp(b.0)));

    let mut rows = Vec::new();
    let mut record_id = 0;
    for (i, (_, bids)) in auctions.iter().enumerate() {
        let distinct: BTreeSet<&str> = bids.iter().map(|b| b.bidder.as_str()).collect();
        for b in bids {
            record_id += 1;
            rows.push(Row {
                record_id,
                auction_id: i as u64 + 1,
                seller: b.seller.clone(),
                bidder: b.bidder.clone(),
                amount: b.amount,
                t: b.t,
                num_bidders: distinct.len() as u64,
                num_bids: bids.len() as u64,
                starting: b.starting,
                winning: b.winning,
                duration: b.duration,
                start: b.start,
                end: b.end,
            });
        }
    }
    rows
}

/// A small dataset of auctions with at most `max_bids` bids drawn from at
/// most three bidders. Rows come back shuffled.
pub fn micro_dataset(rng: &mut ChaCha8Rng, auctions: usize, max_bids: usize) -> Vec<Row> {
    const BIDDERS: [&str; 3] = ["a", "b", "c"];
    const SELLERS: [&str; 2] = ["s1", "s2"];
    let mut rows = Vec::new();
    let mut record_id = 0;
    for id in 1..=auctions as u64 {
        let duration = [1u64, 3, 5, 7, 10][rng.gen_range(0..5)] * 86_400;
        let end = rng.gen_range(0..1_000_000u64);
        let start = end + duration;
        let pool = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=max_bids);
        let seq: Vec<&str> = (0..n).map(|_| BIDDERS[rng.gen_range(0..pool)]).collect();
        let mut times: Vec<u64> = (0..n).map(|_| rng.gen_range(end..=start)).collect();
        times.sort_unstable_by(|a, b| b.cmp(a));
        if rng.gen_bool(0.2) {
            // force a tie so ordering by amount is exercised
            let i = rng.gen_range(0..n);
            times[i] = times[i.saturating_sub(1)];
        }
        let starting = rng.gen_range(0..5_000i64);
        let mut amount = starting;
        let mut amounts = Vec::with_capacity(n);
        for _ in 0..n {
            amount += rng.gen_range(1..2_000);
            amounts.push(amount);
        }
        let distinct: BTreeSet<&str> = seq.iter().copied().collect();
        let seller = SELLERS[rng.gen_range(0..2)];
        for i in 0..n {
            record_id += 1;
            rows.push(Row {
                record_id,
                auction_id: id,
                seller: seller.to_string(),
                bidder: seq[i].to_string(),
                amount: amounts[i],
                t: times[i],
                num_bidders: distinct.len() as u64,
                num_bids: n as u64,
                starting,
                winning: *amounts.last().unwrap(),
                duration,
                start,
                end,
            });
        }
    }
    rows.shuffle(rng);
    rows
}
