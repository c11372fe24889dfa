//! Table-driven CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection,
//! no xorout). The production codec computes the same checksum bit by bit;
//! this table variant is the independent route.

fn table() -> [u16; 256] {
    let mut t = [0u16; 256];
    for (i, entry) in t.iter_mut().enumerate() {
        let mut crc = (i as u16) << 8;
        for _ in 0..8 {
            crc = if crc & 0x8000 != 0 {
                (crc << 1) ^ 0x1021
            } else {
                crc << 1
            };
        }
        *entry = crc;
    }
    t
}

/// Reference CRC-16/CCITT-FALSE over `data`.
pub fn crc16_ccitt_false(data: &[u8]) -> u16 {
    let t = table();
    let mut crc: u16 = 0xFFFF;
    for &b in data {
        let idx = ((crc >> 8) ^ b as u16) & 0xFF;
        crc = (crc << 8) ^ t[idx as usize];
    }
    crc
}
