#pragma once

#include "fairshare/aead.hpp"
#include "fairshare/bytes.hpp"
#include "fairshare/contracts.hpp"
#include "fairshare/errors.hpp"
#include "fairshare/exchange.hpp"
#include "fairshare/keccak.hpp"
#include "fairshare/ledger.hpp"
#include "fairshare/merkle.hpp"
#include "fairshare/pairing.hpp"
#include "fairshare/parties.hpp"
#include "fairshare/pkenc.hpp"
#include "fairshare/pre.hpp"
#include "fairshare/rng.hpp"
#include "fairshare/scenario.hpp"
